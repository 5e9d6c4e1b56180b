use crate::tensor::{Mpo, Mps, TruncationPolicy};
use crate::{Error, Result};

/// Named qubit roles, e.g. Simon's interleaved first and second registers.
#[derive(Clone, Debug, PartialEq)]
pub struct RegisterLayout {
    roles: Vec<(String, Vec<usize>)>,
}

impl RegisterLayout {
    /// Checks that the roles partition `1..=n`.
    pub fn new(n: usize, roles: Vec<(String, Vec<usize>)>) -> Result<Self> {
        let mut seen = vec![false; n];
        for (_, positions) in &roles {
            for &p in positions {
                if p == 0 || p > n {
                    return Err(Error::BadPosition { position: p, n });
                }
                if std::mem::replace(&mut seen[p - 1], true) {
                    return Err(Error::OverlappingPositions(positions.clone()));
                }
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(format!(
                "layout does not assign qubit {}",
                missing + 1
            )));
        }
        Ok(Self { roles })
    }

    /// Single role covering the whole register.
    pub fn contiguous(n: usize) -> Self {
        Self {
            roles: vec![("register".into(), (1..=n).collect())],
        }
    }

    pub fn role(&self, name: &str) -> Option<&[usize]> {
        self.roles.iter().find(|(r, _)| r == name).map(|(_, p)| p.as_slice())
    }

    pub fn roles(&self) -> &[(String, Vec<usize>)] {
        &self.roles
    }
}

/// Ordered gate groups applied one after another, `groups[0]` first.
#[derive(Clone, Debug)]
pub struct GateGroupSequence {
    label: String,
    n: usize,
    groups: Vec<Mpo>,
    layout: RegisterLayout,
}

impl GateGroupSequence {
    pub fn new(label: impl Into<String>, n: usize, groups: Vec<Mpo>, layout: RegisterLayout) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyRegister);
        }
        if let Some(bad) = groups.iter().find(|g| g.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "group acts on {} qubits, sequence has {n}",
                bad.len()
            )));
        }
        Ok(Self {
            label: label.into(),
            n,
            groups,
            layout,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn groups(&self) -> &[Mpo] {
        &self.groups
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn push(&mut self, group: Mpo) -> Result<()> {
        if group.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "group acts on {} qubits, sequence has {}",
                group.len(),
                self.n
            )));
        }
        self.groups.push(group);
        Ok(())
    }

    /// Appends all groups of `other`.
    pub fn extend(&mut self, other: GateGroupSequence) -> Result<()> {
        other.groups.into_iter().try_for_each(|g| self.push(g))
    }
}

/// Final state plus the bond dimensions after every group.
#[derive(Clone, Debug)]
pub struct SequenceRun {
    pub state: Mps,
    /// `ranks[k]` are the state ranks after group `k` was applied and
    /// orthonormalized.
    pub ranks: Vec<Vec<usize>>,
}

impl SequenceRun {
    pub fn max_ranks(&self) -> Vec<usize> {
        self.ranks
            .iter()
            .map(|r| r.iter().copied().max().unwrap_or(1))
            .collect()
    }
}

/// Applies each group and re-orthonormalizes before the next one. The final
/// state is normalized and right-orthonormal unless the sequence is empty,
/// in which case `initial` is returned untouched.
pub fn run_gate_sequence(seq: &GateGroupSequence, initial: &Mps, policy: &TruncationPolicy) -> Result<SequenceRun> {
    if initial.len() != seq.n {
        return Err(Error::DimensionMismatch(format!(
            "initial state has {} qubits, sequence has {}",
            initial.len(),
            seq.n
        )));
    }
    let mut state = initial.clone();
    let mut ranks = Vec::with_capacity(seq.groups.len());
    for group in &seq.groups {
        state = group.apply(&state)?.compress(policy)?;
        ranks.push(state.ranks());
    }
    if !seq.groups.is_empty() {
        state = state.normalize()?;
    }
    Ok(SequenceRun { state, ranks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{hadamard_layer, GateMatrix};

    #[test]
    fn layout_must_partition_register() {
        assert!(RegisterLayout::new(4, vec![("a".into(), vec![1, 3]), ("b".into(), vec![2, 4])]).is_ok());
        assert!(RegisterLayout::new(4, vec![("a".into(), vec![1, 3])]).is_err());
        assert!(RegisterLayout::new(2, vec![("a".into(), vec![1, 1])]).is_err());
        assert!(RegisterLayout::new(2, vec![("a".into(), vec![3])]).is_err());
    }

    #[test]
    fn empty_sequence_returns_initial() {
        let seq = GateGroupSequence::new("empty", 3, vec![], RegisterLayout::contiguous(3)).unwrap();
        let init = Mps::from_basis_state(&[1, 0, 1]).unwrap();
        let run = run_gate_sequence(&seq, &init, &TruncationPolicy::default()).unwrap();
        assert_eq!(run.state, init);
        assert!(run.ranks.is_empty());
    }

    #[test]
    fn groups_must_match_register() {
        let g = hadamard_layer(&[1], 2).unwrap();
        assert!(GateGroupSequence::new("x", 3, vec![g.clone()], RegisterLayout::contiguous(3)).is_err());
        let mut seq = GateGroupSequence::new("x", 2, vec![g], RegisterLayout::contiguous(2)).unwrap();
        assert!(seq.push(hadamard_layer(&[1], 3).unwrap()).is_err());
        let init = Mps::zeros(3).unwrap();
        assert!(run_gate_sequence(&seq, &init, &TruncationPolicy::default()).is_err());
    }

    #[test]
    fn bell_pair_run_records_ranks() {
        let seq = GateGroupSequence::new(
            "bell",
            2,
            vec![
                crate::gates::single_qubit_mpo(&GateMatrix::hadamard(), 1, 2).unwrap(),
                crate::gates::cnot_mpo(1, 2, 2).unwrap(),
            ],
            RegisterLayout::contiguous(2),
        )
        .unwrap();
        let run = run_gate_sequence(&seq, &Mps::zeros(2).unwrap(), &TruncationPolicy::default()).unwrap();
        assert_eq!(run.ranks, vec![vec![1, 1, 1], vec![1, 2, 1]]);
        assert_eq!(run.max_ranks(), vec![1, 2]);
        assert!((run.state.norm() - 1.0).abs() < 1e-12);
    }
}
