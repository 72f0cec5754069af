//! Diffusion characteristics and the accuracy of a sample against the full
//! diffusion network.
//!
//! A characteristic is the mean of a measurement function over an element
//! set: nodes (seed), links (attendance) or cascades (depth). Accuracy is
//! one minus the relative error of the sample mean against the diffusion
//! network mean.

use std::borrow::Borrow;
use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::diffusion::{Cascade, DiffusionNetwork};
use crate::error::{Error, Result};
use crate::graph::{Edge, NodeId};
use crate::sampling::SampledNetwork;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementKind {
    Node,
    Link,
    Cascade,
}

/// Maps an element to an integer label; averages are taken in any
/// [`Scalar`].
pub trait MeasurementFunction<E> {
    const KIND: ElementKind;

    fn label(&self, element: &E) -> usize;
}

/// 1 for nodes that seeded a cascade of the diffusion network, else 0.
pub struct SeedLabel<'a> {
    seeds: &'a HashSet<NodeId>,
}

impl<'a> SeedLabel<'a> {
    pub fn new(seeds: &'a HashSet<NodeId>) -> Self {
        SeedLabel { seeds }
    }
}

impl MeasurementFunction<NodeId> for SeedLabel<'_> {
    const KIND: ElementKind = ElementKind::Node;

    fn label(&self, u: &NodeId) -> usize {
        usize::from(self.seeds.contains(u))
    }
}

/// Number of cascades an edge took part in.
pub struct AttendanceLabel<'a> {
    index: &'a AttendanceIndex,
}

impl<'a> AttendanceLabel<'a> {
    pub fn new(index: &'a AttendanceIndex) -> Self {
        AttendanceLabel { index }
    }
}

impl MeasurementFunction<Edge> for AttendanceLabel<'_> {
    const KIND: ElementKind = ElementKind::Link;

    fn label(&self, e: &Edge) -> usize {
        self.index.count(*e)
    }
}

/// Length of a cascade's infection vector.
pub struct CascadeLength;

impl MeasurementFunction<Cascade> for CascadeLength {
    const KIND: ElementKind = ElementKind::Cascade;

    fn label(&self, c: &Cascade) -> usize {
        c.len()
    }
}

/// Mean label over a non-empty element set.
pub fn average_measure<T, E, F, I>(elements: I, f: &F) -> Result<T>
where
    T: Scalar,
    F: MeasurementFunction<E>,
    I: IntoIterator,
    I::Item: Borrow<E>,
{
    average_labels(elements.into_iter().map(|e| f.label(e.borrow())))
}

/// Mean of raw integer labels.
pub fn average_labels<T: Scalar, I: IntoIterator<Item = usize>>(labels: I) -> Result<T> {
    let (sum, count) = labels
        .into_iter()
        .fold((0usize, 0usize), |(s, c), l| (s + l, c + 1));
    if count == 0 {
        return Err(Error::EmptyElementSet);
    }
    Ok(T::from_count(sum) / T::from_count(count))
}

/// Fraction of `nodes` that are true seeds.
pub fn seed_measure<T: Scalar>(nodes: &[NodeId], true_seeds: &HashSet<NodeId>) -> Result<T> {
    average_measure(nodes, &SeedLabel::new(true_seeds))
}

/// Mean cascade attendance over `edges`; edges in no cascade count as 0.
pub fn link_attendance_measure<T: Scalar>(edges: &[Edge], index: &AttendanceIndex) -> Result<T> {
    average_measure(edges, &AttendanceLabel::new(index))
}

/// Mean cascade length.
///
/// Without a restriction every cascade counts, including empty ones. With a
/// restriction each cascade's IV is cut down to the edges in the set and
/// cascades left empty are skipped.
pub fn depth_measure<T: Scalar>(cascades: &[Cascade], restricted_to: Option<&HashSet<Edge>>) -> Result<T> {
    match restricted_to {
        None => average_measure(cascades, &CascadeLength),
        Some(keep) => average_labels(
            cascades
                .iter()
                .map(|c| c.infection_vector.iter().filter(|e| keep.contains(e)).count())
                .filter(|&len| len > 0),
        ),
    }
}

/// `1 - |reference - sample| / reference`. May be negative.
pub fn accuracy<T: Scalar>(reference: T, sample: T) -> Result<T> {
    if reference <= T::zero() {
        return Err(Error::ZeroReference);
    }
    let err = (reference.clone() - sample).abs() / reference;
    Ok(T::one() - err)
}

/// For each edge, the ids of the cascades whose IV contains it.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AttendanceIndex {
    members: HashMap<Edge, Vec<u32>>,
}

impl AttendanceIndex {
    pub fn from_cascades(cascades: &[Cascade]) -> Self {
        let mut members: HashMap<Edge, Vec<u32>> = HashMap::new();
        for c in cascades {
            for e in &c.infection_vector {
                members.entry(*e).or_default().push(c.id);
            }
        }
        AttendanceIndex { members }
    }

    /// `|C_e|`.
    pub fn count(&self, e: Edge) -> usize {
        self.members.get(&e).map_or(0, Vec::len)
    }

    /// `C_e`, in cascade order.
    pub fn cascades_of(&self, e: Edge) -> &[u32] {
        self.members.get(&e).map_or(&[], Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Characteristic {
    Seed,
    LinkAttendance,
    Depth,
}

impl Characteristic {
    pub const ALL: [Characteristic; 3] = [
        Characteristic::Seed,
        Characteristic::LinkAttendance,
        Characteristic::Depth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Characteristic::Seed => "seed",
            Characteristic::LinkAttendance => "link_attendance",
            Characteristic::Depth => "depth",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    pub fn kind(self) -> ElementKind {
        match self {
            Characteristic::Seed => ElementKind::Node,
            Characteristic::LinkAttendance => ElementKind::Link,
            Characteristic::Depth => ElementKind::Cascade,
        }
    }
}

impl fmt::Display for Characteristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How sampled nodes are labelled for the seed characteristic.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SeedLabeling {
    /// A sampled node is a seed iff it seeded a cascade of the diffusion
    /// network.
    #[default]
    GroundTruth,
    /// A sampled node is a seed iff it has out-links but no in-links inside
    /// the sample.
    InferredRoots,
}

/// Why a characteristic result has no accuracy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Undefined {
    /// The diffusion network has no element of the required kind.
    EmptyReference,
    /// The reference mean is zero.
    ZeroReference,
    /// The sample has no element of the required kind.
    EmptySample,
}

impl Undefined {
    pub fn name(self) -> &'static str {
        match self {
            Undefined::EmptyReference => "empty_reference",
            Undefined::ZeroReference => "zero_reference",
            Undefined::EmptySample => "empty_sample",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CharacteristicResult<T> {
    pub characteristic: Characteristic,
    pub reference: Option<T>,
    pub sample: Option<T>,
    pub accuracy: Option<T>,
    pub undefined: Option<Undefined>,
}

/// Measures `characteristic` on the diffusion network and on the sample with
/// the same measurement function and scores the sample.
pub fn evaluate<T: Scalar>(
    dn: &DiffusionNetwork,
    sample: &SampledNetwork,
    characteristic: Characteristic,
    labeling: SeedLabeling,
) -> CharacteristicResult<T> {
    let (reference, sample_value) = match characteristic {
        Characteristic::Seed => {
            let seeds: HashSet<NodeId> = dn.seeds().iter().copied().collect();
            let reference = seed_measure::<T>(dn.nodes(), &seeds);
            let sample_value = match labeling {
                SeedLabeling::GroundTruth => seed_measure::<T>(sample.nodes(), &seeds),
                SeedLabeling::InferredRoots => {
                    let roots = sample.roots().into_iter().collect();
                    seed_measure::<T>(sample.nodes(), &roots)
                }
            };
            (reference, sample_value)
        }
        Characteristic::LinkAttendance => {
            let index = dn.attendance();
            let star: Vec<Edge> = dn.graph().edges().collect();
            (
                link_attendance_measure::<T>(&star, index),
                link_attendance_measure::<T>(sample.edges(), index),
            )
        }
        Characteristic::Depth => {
            let keep: HashSet<Edge> = sample.edges().iter().copied().collect();
            (
                depth_measure::<T>(dn.cascades(), None),
                depth_measure::<T>(dn.cascades(), Some(&keep)),
            )
        }
    };
    let undefined_result = |reference, sample, why| CharacteristicResult {
        characteristic,
        reference,
        sample,
        accuracy: None,
        undefined: Some(why),
    };
    let reference = match reference {
        Ok(r) => r,
        Err(_) => return undefined_result(None, sample_value.ok(), Undefined::EmptyReference),
    };
    let sample_value = match sample_value {
        Ok(s) => s,
        Err(_) => return undefined_result(Some(reference), None, Undefined::EmptySample),
    };
    match accuracy(reference.clone(), sample_value.clone()) {
        Ok(lambda) => CharacteristicResult {
            characteristic,
            reference: Some(reference),
            sample: Some(sample_value),
            accuracy: Some(lambda),
            undefined: None,
        },
        Err(_) => undefined_result(Some(reference), Some(sample_value), Undefined::ZeroReference),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    type Q = Ratio<i64>;

    fn q(n: i64, d: i64) -> Q {
        Q::new(n, d)
    }

    #[test]
    fn average_examples() {
        assert_eq!(average_labels::<f64, _>([1, 1, 0, 0]).unwrap(), 0.5);
        assert_eq!(average_labels::<f64, _>([7]).unwrap(), 7.0);
        assert_eq!(average_labels::<f64, _>([2, 3, 4]).unwrap(), 3.0);
        assert_eq!(average_labels::<Q, _>([2, 3, 5]).unwrap(), q(10, 3));
        assert!(matches!(
            average_labels::<f64, _>(std::iter::empty()),
            Err(Error::EmptyElementSet)
        ));
    }

    #[test]
    fn seed_examples() {
        let nodes: Vec<NodeId> = (0..10usize).map(NodeId::from).collect();
        let three: HashSet<NodeId> = [1usize, 4, 7].into_iter().map(NodeId::from).collect();
        assert_eq!(seed_measure::<Q>(&nodes, &three).unwrap(), q(3, 10));
        let all: HashSet<NodeId> = nodes.iter().copied().collect();
        assert_eq!(seed_measure::<f64>(&nodes, &all).unwrap(), 1.0);
        assert_eq!(seed_measure::<f64>(&nodes, &HashSet::new()).unwrap(), 0.0);
        assert!(seed_measure::<f64>(&[], &all).is_err());
    }

    fn cascade(id: u32, seed: usize, iv: &[(usize, usize)]) -> Cascade {
        Cascade::new(id, NodeId::from(seed), iv.iter().copied().map(Edge::from).collect())
    }

    #[test]
    fn attendance_examples() {
        let e = Edge::new(0usize, 1usize);
        let idx = AttendanceIndex::from_cascades(&[
            cascade(0, 0, &[(0, 1)]),
            cascade(1, 0, &[(0, 1)]),
            cascade(2, 0, &[(0, 1), (1, 2)]),
        ]);
        assert_eq!(idx.cascades_of(e), &[0, 1, 2]);
        assert_eq!(link_attendance_measure::<f64>(&[e], &idx).unwrap(), 3.0);

        let idx = AttendanceIndex::from_cascades(&[cascade(0, 0, &[(0, 1)]), cascade(1, 2, &[(2, 3)])]);
        let edges = [Edge::new(0usize, 1usize), Edge::new(2usize, 3usize)];
        assert_eq!(link_attendance_measure::<f64>(&edges, &idx).unwrap(), 1.0);

        let idx = AttendanceIndex::from_cascades(&[cascade(0, 0, &[(0, 1)]), cascade(1, 0, &[(0, 1)])]);
        let edges = [Edge::new(0usize, 1usize), Edge::new(5usize, 6usize)];
        assert_eq!(link_attendance_measure::<f64>(&edges, &idx).unwrap(), 1.0);
    }

    #[test]
    fn depth_examples() {
        let cs = [cascade(0, 0, &[(0, 1), (1, 2)]), cascade(1, 5, &[(5, 6), (6, 7), (7, 8), (6, 9)])];
        assert_eq!(depth_measure::<f64>(&cs, None).unwrap(), 3.0);
        let keep: HashSet<Edge> = [Edge::new(5usize, 6usize), Edge::new(6usize, 9usize)].into();
        assert_eq!(depth_measure::<f64>(&cs, Some(&keep)).unwrap(), 2.0);
        assert_eq!(depth_measure::<f64>(&cs[..1], None).unwrap(), 2.0);
        assert!(matches!(
            depth_measure::<f64>(&cs, Some(&HashSet::new())),
            Err(Error::EmptyElementSet)
        ));
        let with_empty = [cascade(0, 0, &[(0, 1), (1, 2)]), cascade(1, 3, &[])];
        assert_eq!(depth_measure::<Q>(&with_empty, None).unwrap(), q(1, 1));
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(q(2, 5), q(2, 5)).unwrap(), q(1, 1));
        assert_eq!(accuracy(q(2, 5), q(3, 10)).unwrap(), q(3, 4));
        assert_eq!(accuracy(q(2, 5), q(9, 10)).unwrap(), q(-1, 4));
        assert!((accuracy(0.4f64, 0.3).unwrap() - 0.75).abs() < 1e-12);
        assert!((accuracy(0.4f32, 0.9).unwrap() + 0.25).abs() < 1e-6);
        assert!(matches!(accuracy(0.0f64, 0.3), Err(Error::ZeroReference)));
    }

    #[test]
    fn characteristic_names_round_trip() {
        for c in Characteristic::ALL {
            assert_eq!(Characteristic::parse(c.name()), Some(c));
        }
        assert_eq!(Characteristic::parse("width"), None);
    }
}
