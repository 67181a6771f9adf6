//! Small convolutional Q-network with manual reverse-mode gradients.
//!
//! Architecture: two 3x3 convolutions (padding 1, ReLU) over the stacked
//! occupancy/head rasters, flatten, concatenate the heading one-hot and the
//! optional target features, one ReLU hidden layer, linear head with one
//! output per action.
//!
//! All parameters live in one flat vector so optimizers, target copies and
//! checkpoints treat them uniformly. Activations are channel-last.

use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::Rng;
use std::fmt::Debug;
use std::io::{Read, Write};
use std::ops::AddAssign;
use thiserror::Error;

pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + AddAssign + Debug + Default + Send + Sync + 'static
{
    /// `c = op(a) * op(b) + beta * c` for row-major matrices, where `op(a)`
    /// is `m x k` and `op(b)` is `k x n`. A transposed operand is stored
    /// with its dimensions swapped.
    #[allow(clippy::too_many_arguments)]
    fn gemm(m: usize, k: usize, n: usize, a: &[Self], ta: bool, b: &[Self], tb: bool, beta: Self, c: &mut [Self]);
}

fn strides(rows: usize, cols: usize, transposed: bool) -> (isize, isize) {
    if transposed {
        (1, rows as isize)
    } else {
        (cols as isize, 1)
    }
}

/// Below this many rows packing costs more than the product itself.
const SMALL_M: usize = 4;

fn small_gemm<T: Float + AddAssign>(m: usize, k: usize, n: usize, a: &[T], b: &[T], beta: T, c: &mut [T]) {
    for i in 0..m {
        let crow = &mut c[i * n..][..n];
        if beta == T::zero() {
            crow.fill(T::zero());
        } else if beta != T::one() {
            for v in crow.iter_mut() {
                *v = *v * beta;
            }
        }
        for (kk, &x) in a[i * k..][..k].iter().enumerate() {
            if x == T::zero() {
                continue;
            }
            for (o, &w) in crow.iter_mut().zip(&b[kk * n..][..n]) {
                *o += x * w;
            }
        }
    }
}

macro_rules! impl_scalar {
    ($t:ty, $f:path) => {
        impl Scalar for $t {
            fn gemm(m: usize, k: usize, n: usize, a: &[$t], ta: bool, b: &[$t], tb: bool, beta: $t, c: &mut [$t]) {
                assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
                if m <= SMALL_M && !ta && !tb {
                    small_gemm(m, k, n, a, b, beta, c);
                    return;
                }
                let (rsa, csa) = strides(m, k, ta);
                let (rsb, csb) = strides(k, n, tb);
                // SAFETY: the asserts above bound every index the kernel touches.
                unsafe {
                    $f(m, k, n, 1.0, a.as_ptr(), rsa, csa, b.as_ptr(), rsb, csb, beta, c.as_mut_ptr(), n as isize, 1);
                }
            }
        }
    };
}

impl_scalar!(f32, matrixmultiply::sgemm);
impl_scalar!(f64, matrixmultiply::dgemm);

fn cast<T: Scalar>(v: f64) -> T {
    T::from_f64(v).expect("finite constant")
}

const KERNEL: usize = 3;
const PAD: usize = 1;
const MAGIC: &[u8; 4] = b"IDQN";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("not a Q-network checkpoint")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    BadVersion(u32),
    #[error("architecture mismatch: file has {found:?}, expected {expected:?}")]
    ArchMismatch { found: Arch, expected: Arch },
    #[error("truncated checkpoint")]
    Truncated,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Shape descriptor; stored verbatim in checkpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arch {
    pub in_channels: usize,
    pub height: usize,
    pub width: usize,
    pub conv1_filters: usize,
    pub conv1_stride: usize,
    pub conv2_filters: usize,
    pub conv2_stride: usize,
    pub hidden: usize,
    pub n_heading: usize,
    pub n_target: usize,
    pub n_actions: usize,
}

fn out_dim(n: usize, stride: usize) -> usize {
    (n + 2 * PAD - KERNEL) / stride + 1
}

impl Arch {
    pub fn conv1_shape(&self) -> (usize, usize) {
        (out_dim(self.height, self.conv1_stride), out_dim(self.width, self.conv1_stride))
    }

    pub fn conv2_shape(&self) -> (usize, usize) {
        let (h, w) = self.conv1_shape();
        (out_dim(h, self.conv2_stride), out_dim(w, self.conv2_stride))
    }

    pub fn n_extra(&self) -> usize {
        self.n_heading + self.n_target
    }

    pub fn fc_inputs(&self) -> usize {
        let (h, w) = self.conv2_shape();
        h * w * self.conv2_filters + self.n_extra()
    }

    fn fields(&self) -> [usize; 11] {
        [
            self.in_channels,
            self.height,
            self.width,
            self.conv1_filters,
            self.conv1_stride,
            self.conv2_filters,
            self.conv2_stride,
            self.hidden,
            self.n_heading,
            self.n_target,
            self.n_actions,
        ]
    }

    fn from_fields(f: [usize; 11]) -> Arch {
        Arch {
            in_channels: f[0],
            height: f[1],
            width: f[2],
            conv1_filters: f[3],
            conv1_stride: f[4],
            conv2_filters: f[5],
            conv2_stride: f[6],
            hidden: f[7],
            n_heading: f[8],
            n_target: f[9],
            n_actions: f[10],
        }
    }

    fn layout(&self) -> ParamLayout {
        let c1_w = self.in_channels * KERNEL * KERNEL * self.conv1_filters;
        let c2_w = self.conv1_filters * KERNEL * KERNEL * self.conv2_filters;
        let f1_w = self.fc_inputs() * self.hidden;
        let f2_w = self.hidden * self.n_actions;
        let mut off = 0;
        let mut take = |n: usize| {
            let r = off..off + n;
            off += n;
            r
        };
        let l = ParamLayout {
            c1_w: take(c1_w),
            c1_b: take(self.conv1_filters),
            c2_w: take(c2_w),
            c2_b: take(self.conv2_filters),
            f1_w: take(f1_w),
            f1_b: take(self.hidden),
            f2_w: take(f2_w),
            f2_b: take(self.n_actions),
            total: 0,
        };
        ParamLayout { total: off, ..l }
    }
}

#[derive(Debug, Clone)]
struct ParamLayout {
    c1_w: std::ops::Range<usize>,
    c1_b: std::ops::Range<usize>,
    c2_w: std::ops::Range<usize>,
    c2_b: std::ops::Range<usize>,
    f1_w: std::ops::Range<usize>,
    f1_b: std::ops::Range<usize>,
    f2_w: std::ops::Range<usize>,
    f2_b: std::ops::Range<usize>,
    total: usize,
}

/// Network input: indices of the set cells of the binary raster stack
/// (channel-last, `(row * width + col) * channels + channel`) plus the dense
/// heading/target vector.
#[derive(Debug, Clone, PartialEq)]
pub struct NetInput<T> {
    pub active: Vec<u32>,
    pub extra: Vec<T>,
}

struct ConvActs<T> {
    pre1: Vec<T>,
    /// im2col patches of the conv1 output, one row per conv2 output pixel.
    cols: Vec<T>,
    pre2: Vec<T>,
    /// Flattened conv2 output followed by the extra features.
    z: Vec<T>,
}

/// Intermediate activations kept for the backward pass.
pub struct Activations<T> {
    conv: ConvActs<T>,
    pre3: Vec<T>,
    a3: Vec<T>,
    pub q: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork<T> {
    arch: Arch,
    layout_total: usize,
    pub params: Vec<T>,
}

impl<T: Scalar> QNetwork<T> {
    /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialisation.
    pub fn new<R: Rng + ?Sized>(arch: Arch, rng: &mut R) -> Self {
        let l = arch.layout();
        let mut params = vec![T::zero(); l.total];
        let fan1 = (arch.in_channels * KERNEL * KERNEL) as f64;
        let fan2 = (arch.conv1_filters * KERNEL * KERNEL) as f64;
        let fan3 = arch.fc_inputs() as f64;
        let fan4 = arch.hidden as f64;
        let groups = [
            (l.c1_w.clone(), fan1),
            (l.c1_b.clone(), fan1),
            (l.c2_w.clone(), fan2),
            (l.c2_b.clone(), fan2),
            (l.f1_w.clone(), fan3),
            (l.f1_b.clone(), fan3),
            (l.f2_w.clone(), fan4),
            (l.f2_b.clone(), fan4),
        ];
        for (range, fan) in groups {
            let bound = 1.0 / fan.sqrt();
            for p in &mut params[range] {
                *p = cast(rng.gen_range(-bound..bound));
            }
        }
        QNetwork {
            arch,
            layout_total: l.total,
            params,
        }
    }

    pub fn arch(&self) -> &Arch {
        &self.arch
    }

    pub fn num_params(&self) -> usize {
        self.layout_total
    }

    /// Converts between float precisions (used for gradient checks).
    pub fn cast<U: Scalar>(&self) -> QNetwork<U> {
        QNetwork {
            arch: self.arch,
            layout_total: self.layout_total,
            params: self.params.iter().map(|p| cast(p.to_f64().unwrap())).collect(),
        }
    }

    pub fn forward(&self, input: &NetInput<T>) -> Vec<T> {
        self.forward_full(input).q
    }

    pub fn forward_full(&self, input: &NetInput<T>) -> Activations<T> {
        self.forward_batch(&[input]).pop().expect("one sample")
    }

    /// Forward pass over several inputs; the fully connected layers run as
    /// one matrix product over the batch.
    pub fn forward_batch(&self, inputs: &[&NetInput<T>]) -> Vec<Activations<T>> {
        let a = &self.arch;
        let l = a.layout();
        let p = &self.params;
        let convs: Vec<ConvActs<T>> = inputs.iter().map(|x| self.conv_forward(x)).collect();

        let (bsz, fdim, hdim, na) = (inputs.len(), a.fc_inputs(), a.hidden, a.n_actions);
        let mut zmat = Vec::with_capacity(bsz * fdim);
        for c in &convs {
            zmat.extend_from_slice(&c.z);
        }
        let mut pre3 = Vec::with_capacity(bsz * hdim);
        for _ in 0..bsz {
            pre3.extend_from_slice(&p[l.f1_b.clone()]);
        }
        T::gemm(bsz, fdim, hdim, &zmat, false, &p[l.f1_w.clone()], false, T::one(), &mut pre3);
        let a3: Vec<T> = pre3.iter().map(|&v| v.max(T::zero())).collect();
        let mut q = Vec::with_capacity(bsz * na);
        for _ in 0..bsz {
            q.extend_from_slice(&p[l.f2_b.clone()]);
        }
        T::gemm(bsz, hdim, na, &a3, false, &p[l.f2_w.clone()], false, T::one(), &mut q);

        convs
            .into_iter()
            .enumerate()
            .map(|(b, conv)| Activations {
                conv,
                pre3: pre3[b * hdim..][..hdim].to_vec(),
                a3: a3[b * hdim..][..hdim].to_vec(),
                q: q[b * na..][..na].to_vec(),
            })
            .collect()
    }

    fn conv_forward(&self, input: &NetInput<T>) -> ConvActs<T> {
        let a = &self.arch;
        let l = a.layout();
        let p = &self.params;
        let (h1, w1) = a.conv1_shape();
        let (h2, w2) = a.conv2_shape();
        let (c0, c1, c2) = (a.in_channels, a.conv1_filters, a.conv2_filters);

        // conv1: scatter each set input cell into the outputs it feeds.
        let mut pre1 = vec![T::zero(); h1 * w1 * c1];
        let b1 = &p[l.c1_b.clone()];
        for row in pre1.chunks_exact_mut(c1) {
            row.copy_from_slice(b1);
        }
        let w1p = &p[l.c1_w.clone()];
        for &idx in &input.active {
            let idx = idx as usize;
            let (pix, ci) = (idx / c0, idx % c0);
            let (iy, ix) = (pix / a.width, pix % a.width);
            for_each_tap(iy, ix, a.conv1_stride, h1, w1, |oy, ox, k| {
                let wrow = &w1p[(ci * KERNEL * KERNEL + k) * c1..][..c1];
                let out = &mut pre1[(oy * w1 + ox) * c1..][..c1];
                for (o, w) in out.iter_mut().zip(wrow) {
                    *o += *w;
                }
            });
        }
        let a1: Vec<T> = pre1.iter().map(|&v| v.max(T::zero())).collect();

        // conv2 as im2col followed by a matrix product.
        let kdim = c1 * KERNEL * KERNEL;
        let mut cols = vec![T::zero(); h2 * w2 * kdim];
        for_each_patch(h1, w1, h2, w2, a.conv2_stride, |opix, ipix, k| {
            let row = &mut cols[opix * kdim..][..kdim];
            for (ci, &x) in a1[ipix * c1..][..c1].iter().enumerate() {
                row[ci * KERNEL * KERNEL + k] = x;
            }
        });
        let mut pre2 = Vec::with_capacity(h2 * w2 * c2);
        for _ in 0..h2 * w2 {
            pre2.extend_from_slice(&p[l.c2_b.clone()]);
        }
        T::gemm(h2 * w2, kdim, c2, &cols, false, &p[l.c2_w.clone()], false, T::one(), &mut pre2);

        let mut z: Vec<T> = pre2.iter().map(|&v| v.max(T::zero())).collect();
        z.extend_from_slice(&input.extra);
        debug_assert_eq!(z.len(), a.fc_inputs());
        ConvActs { pre1, cols, pre2, z }
    }

    /// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(q).
    pub fn backward(&self, input: &NetInput<T>, acts: &Activations<T>, dq: &[T], grad: &mut [T]) {
        self.backward_batch(&[input], std::slice::from_ref(acts), &[dq], grad);
    }

    /// Batched form of [`QNetwork::backward`]; gradients are summed.
    pub fn backward_batch(&self, inputs: &[&NetInput<T>], acts: &[Activations<T>], dqs: &[&[T]], grad: &mut [T]) {
        let a = &self.arch;
        let l = a.layout();
        let p = &self.params;
        let (h2, w2) = a.conv2_shape();
        let (bsz, fdim, hdim, na) = (acts.len(), a.fc_inputs(), a.hidden, a.n_actions);

        // fc2
        let mut dqm = Vec::with_capacity(bsz * na);
        let mut a3m = Vec::with_capacity(bsz * hdim);
        for (act, dq) in acts.iter().zip(dqs) {
            dqm.extend_from_slice(&dq[..na]);
            a3m.extend_from_slice(&act.a3);
        }
        add_column_sums(&mut grad[l.f2_b.clone()], &dqm, na);
        T::gemm(hdim, bsz, na, &a3m, true, &dqm, false, T::one(), &mut grad[l.f2_w.clone()]);
        let mut dpre3 = vec![T::zero(); bsz * hdim];
        T::gemm(bsz, na, hdim, &dqm, false, &p[l.f2_w.clone()], true, T::zero(), &mut dpre3);
        for (d, act) in dpre3.chunks_exact_mut(hdim).zip(acts) {
            for (dv, &pre) in d.iter_mut().zip(&act.pre3) {
                if pre <= T::zero() {
                    *dv = T::zero();
                }
            }
        }

        // fc1
        let mut zm = Vec::with_capacity(bsz * fdim);
        for act in acts {
            zm.extend_from_slice(&act.conv.z);
        }
        add_column_sums(&mut grad[l.f1_b.clone()], &dpre3, hdim);
        T::gemm(fdim, bsz, hdim, &zm, true, &dpre3, false, T::one(), &mut grad[l.f1_w.clone()]);
        let mut dz = vec![T::zero(); bsz * fdim];
        T::gemm(bsz, hdim, fdim, &dpre3, false, &p[l.f1_w.clone()], true, T::zero(), &mut dz);

        let n_conv = h2 * w2 * a.conv2_filters;
        for ((input, act), dzb) in inputs.iter().zip(acts).zip(dz.chunks_exact_mut(fdim)) {
            let dpre2 = &mut dzb[..n_conv];
            for (d, &pre) in dpre2.iter_mut().zip(&act.conv.pre2) {
                if pre <= T::zero() {
                    *d = T::zero();
                }
            }
            self.conv_backward(input, &act.conv, dpre2, grad);
        }
    }

    fn conv_backward(&self, input: &NetInput<T>, acts: &ConvActs<T>, dpre2: &[T], grad: &mut [T]) {
        let a = &self.arch;
        let l = a.layout();
        let p = &self.params;
        let (h1, w1) = a.conv1_shape();
        let (h2, w2) = a.conv2_shape();
        let (c0, c1, c2) = (a.in_channels, a.conv1_filters, a.conv2_filters);
        let kdim = c1 * KERNEL * KERNEL;

        // conv2
        add_column_sums(&mut grad[l.c2_b.clone()], dpre2, c2);
        T::gemm(kdim, h2 * w2, c2, &acts.cols, true, dpre2, false, T::one(), &mut grad[l.c2_w.clone()]);
        let mut dcols = vec![T::zero(); h2 * w2 * kdim];
        T::gemm(h2 * w2, c2, kdim, dpre2, false, &p[l.c2_w.clone()], true, T::zero(), &mut dcols);
        let mut dpre1 = vec![T::zero(); h1 * w1 * c1];
        for_each_patch(h1, w1, h2, w2, a.conv2_stride, |opix, ipix, k| {
            let row = &dcols[opix * kdim..][..kdim];
            for (ci, d) in dpre1[ipix * c1..][..c1].iter_mut().enumerate() {
                *d += row[ci * KERNEL * KERNEL + k];
            }
        });
        for (d, &pre) in dpre1.iter_mut().zip(&acts.pre1) {
            if pre <= T::zero() {
                *d = T::zero();
            }
        }

        // conv1
        add_column_sums(&mut grad[l.c1_b.clone()], &dpre1, c1);
        let gw = &mut grad[l.c1_w.clone()];
        for &idx in &input.active {
            let idx = idx as usize;
            let (pix, ci) = (idx / c0, idx % c0);
            let (iy, ix) = (pix / a.width, pix % a.width);
            for_each_tap(iy, ix, a.conv1_stride, h1, w1, |oy, ox, k| {
                let d = &dpre1[(oy * w1 + ox) * c1..][..c1];
                let grow = &mut gw[(ci * KERNEL * KERNEL + k) * c1..][..c1];
                for (g, dv) in grow.iter_mut().zip(d) {
                    *g += *dv;
                }
            });
        }
    }

    pub fn write_checkpoint<W: Write>(&self, mut w: W) -> Result<(), CheckpointError> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        for f in self.arch.fields() {
            w.write_all(&(f as u32).to_le_bytes())?;
        }
        w.write_all(&(self.params.len() as u64).to_le_bytes())?;
        for p in &self.params {
            w.write_all(&p.to_f32().unwrap_or(f32::NAN).to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a checkpoint, rejecting files built for a different architecture.
    pub fn read_checkpoint<R: Read>(mut r: R, expected: Arch) -> Result<Self, CheckpointError> {
        let mut magic = [0u8; 4];
        read_exact(&mut r, &mut magic)?;
        if &magic != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let version = read_u32(&mut r)?;
        if version != VERSION {
            return Err(CheckpointError::BadVersion(version));
        }
        let mut fields = [0usize; 11];
        for f in fields.iter_mut() {
            *f = read_u32(&mut r)? as usize;
        }
        let found = Arch::from_fields(fields);
        if found != expected {
            return Err(CheckpointError::ArchMismatch { found, expected });
        }
        let mut n = [0u8; 8];
        read_exact(&mut r, &mut n)?;
        let n = u64::from_le_bytes(n) as usize;
        let total = expected.layout().total;
        if n != total {
            return Err(CheckpointError::ArchMismatch { found, expected });
        }
        let mut params = Vec::with_capacity(n);
        let mut buf = [0u8; 4];
        for _ in 0..n {
            read_exact(&mut r, &mut buf)?;
            params.push(cast(f32::from_le_bytes(buf) as f64));
        }
        Ok(QNetwork {
            arch: expected,
            layout_total: total,
            params,
        })
    }
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<(), CheckpointError> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => CheckpointError::Truncated,
        _ => CheckpointError::Io(e),
    })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, CheckpointError> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// Adds the column sums of the row-major `rows x width` matrix `m` to `acc`.
fn add_column_sums<T: Scalar>(acc: &mut [T], m: &[T], width: usize) {
    for row in m.chunks_exact(width) {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += *v;
        }
    }
}

/// Calls `f(out_pixel, in_pixel, tap)` for every in-bounds kernel tap of a
/// padded 3x3 convolution, pixels flattened row-major.
fn for_each_patch<F: FnMut(usize, usize, usize)>(
    in_h: usize,
    in_w: usize,
    out_h: usize,
    out_w: usize,
    stride: usize,
    mut f: F,
) {
    for oy in 0..out_h {
        for ox in 0..out_w {
            for ky in 0..KERNEL {
                let Some(iy) = (oy * stride + ky).checked_sub(PAD).filter(|&v| v < in_h) else {
                    continue;
                };
                for kx in 0..KERNEL {
                    let Some(ix) = (ox * stride + kx).checked_sub(PAD).filter(|&v| v < in_w) else {
                        continue;
                    };
                    f(oy * out_w + ox, iy * in_w + ix, ky * KERNEL + kx);
                }
            }
        }
    }
}

/// Calls `f(oy, ox, tap)` for every output position fed by input `(iy, ix)`,
/// where `tap = ky * 3 + kx` indexes the kernel.
#[inline]
fn for_each_tap<F: FnMut(usize, usize, usize)>(
    iy: usize,
    ix: usize,
    stride: usize,
    out_h: usize,
    out_w: usize,
    mut f: F,
) {
    for ky in 0..KERNEL {
        // oy * stride + ky - PAD == iy
        let ny = iy + PAD;
        if ny < ky || (ny - ky) % stride != 0 {
            continue;
        }
        let oy = (ny - ky) / stride;
        if oy >= out_h {
            continue;
        }
        for kx in 0..KERNEL {
            let nx = ix + PAD;
            if nx < kx || (nx - kx) % stride != 0 {
                continue;
            }
            let ox = (nx - kx) / stride;
            if ox >= out_w {
                continue;
            }
            f(oy, ox, ky * KERNEL + kx);
        }
    }
}

/// Moments of parameters that stop receiving gradient decay geometrically;
/// zeroing them before they go subnormal keeps the update loop fast.
#[inline]
fn flush(x: f32) -> f32 {
    if x.abs() < 1e-30 {
        0.0
    } else {
        x
    }
}

/// Adam with bias correction.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    m: Vec<f32>,
    v: Vec<f32>,
    t: u64,
}

impl Adam {
    pub fn new(n: usize, learning_rate: f64) -> Self {
        Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f32], grad: &[f32]) {
        self.t += 1;
        let (b1, b2) = (self.beta1 as f32, self.beta2 as f32);
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        let step = (self.learning_rate * c2.sqrt() / c1) as f32;
        let eps = (self.epsilon * c2.sqrt()) as f32;
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = flush(b1 * self.m[i] + (1.0 - b1) * g);
            self.v[i] = flush(b2 * self.v[i] + (1.0 - b2) * g * g);
            params[i] -= step * self.m[i] / (self.v[i].sqrt() + eps);
        }
    }
}
