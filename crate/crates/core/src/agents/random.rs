use super::AgentError;
use crate::geometry::Action;
use rand::Rng;

/// Uniform choice among legal actions.
pub fn random_policy<R: Rng + ?Sized>(mask: &[bool; Action::COUNT], rng: &mut R) -> Result<Action, AgentError> {
    let legal: Vec<usize> = (0..Action::COUNT).filter(|&i| mask[i]).collect();
    if legal.is_empty() {
        return Err(AgentError::NoLegalAction);
    }
    let i = legal[rng.gen_range(0..legal.len())];
    Ok(Action::new(i as u8).expect("index below action count"))
}
