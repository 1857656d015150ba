//! Unit-power constellations, product alphabets and transmission modes.
//!
//! Every non-null constellation is normalized analytically so that its mean
//! power under the uniform distribution is exactly one. The null alphabet
//! `{0}` stands for a stream that carries no signal.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result, C64};

/// Supported constellations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstellationKind {
    Null,
    Bpsk,
    Qpsk,
    Qam8,
    Qam16,
}

impl ConstellationKind {
    /// Every kind, ordered by cardinality.
    pub const ALL: [ConstellationKind; 5] = [
        ConstellationKind::Null,
        ConstellationKind::Bpsk,
        ConstellationKind::Qpsk,
        ConstellationKind::Qam8,
        ConstellationKind::Qam16,
    ];

    /// Number of points (the null alphabet counts as one point).
    pub fn order(self) -> usize {
        match self {
            ConstellationKind::Null => 1,
            ConstellationKind::Bpsk => 2,
            ConstellationKind::Qpsk => 4,
            ConstellationKind::Qam8 => 8,
            ConstellationKind::Qam16 => 16,
        }
    }

    /// Stable lowercase name used in configs and CSV files.
    pub fn name(self) -> &'static str {
        match self {
            ConstellationKind::Null => "null",
            ConstellationKind::Bpsk => "bpsk",
            ConstellationKind::Qpsk => "qpsk",
            ConstellationKind::Qam8 => "qam8",
            ConstellationKind::Qam16 => "qam16",
        }
    }

    /// Label as printed in mode tables.
    pub fn table_label(self) -> &'static str {
        match self {
            ConstellationKind::Null => "{0}",
            ConstellationKind::Bpsk => "BPSK",
            ConstellationKind::Qpsk => "QPSK",
            ConstellationKind::Qam8 => "8QAM",
            ConstellationKind::Qam16 => "16QAM",
        }
    }

    fn from_order(order: usize) -> Option<ConstellationKind> {
        Self::ALL.into_iter().find(|k| k.order() == order)
    }
}

impl fmt::Display for ConstellationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConstellationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::UnknownConstellation(s.to_string()))
    }
}

/// A finite constellation drawn uniformly.
#[derive(Debug, Clone, PartialEq)]
pub struct Alphabet {
    kind: ConstellationKind,
    points: Vec<C64>,
}

impl Alphabet {
    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    /// True for the single-point alphabet `{0}`.
    pub fn is_null(&self) -> bool {
        self.kind == ConstellationKind::Null
    }

    /// Mean power under the uniform distribution.
    pub fn mean_power(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order() as f64
    }

    /// `log2` of the cardinality, the per-symbol rate ceiling.
    pub fn bits(&self) -> f64 {
        (self.order() as f64).log2()
    }
}

/// Builds the unit-power constellation of the given kind.
///
/// Square and rectangular QAM grids use odd integer coordinates scaled by
/// the inverse square root of the grid's mean energy. 8QAM is the 4x2 grid
/// `{±1,±3} x {±1}`.
pub fn make_constellation(kind: ConstellationKind) -> Alphabet {
    let grid = |re: &[f64], im: &[f64]| -> Vec<C64> {
        let energy = re.iter().map(|r| r * r).sum::<f64>() / re.len() as f64
            + im.iter().map(|i| i * i).sum::<f64>() / im.len() as f64;
        let scale = 1.0 / energy.sqrt();
        re.iter()
            .flat_map(|&r| im.iter().map(move |&i| C64::new(r * scale, i * scale)))
            .collect()
    };
    let points = match kind {
        ConstellationKind::Null => vec![C64::new(0.0, 0.0)],
        ConstellationKind::Bpsk => vec![C64::new(-1.0, 0.0), C64::new(1.0, 0.0)],
        ConstellationKind::Qpsk => grid(&[-1.0, 1.0], &[-1.0, 1.0]),
        ConstellationKind::Qam8 => grid(&[-3.0, -1.0, 1.0, 3.0], &[-1.0, 1.0]),
        ConstellationKind::Qam16 => grid(&[-3.0, -1.0, 1.0, 3.0], &[-3.0, -1.0, 1.0, 3.0]),
    };
    Alphabet { kind, points }
}

/// Cartesian product of scalar alphabets.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorAlphabet {
    vectors: Vec<Vec<C64>>,
    dims: usize,
}

impl VectorAlphabet {
    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// The one-dimensional null alphabet `{(0)}`.
    pub fn null() -> VectorAlphabet {
        product_alphabet(&[make_constellation(ConstellationKind::Null)])
    }
}

/// All combinations of the component alphabets in lexicographic order (the
/// first component varies slowest). An empty component list yields the single
/// zero-dimensional vector.
pub fn product_alphabet(components: &[Alphabet]) -> VectorAlphabet {
    let mut vectors: Vec<Vec<C64>> = vec![Vec::with_capacity(components.len())];
    for comp in components {
        vectors = vectors
            .into_iter()
            .flat_map(|prefix| {
                comp.points().iter().map(move |&p| {
                    let mut v = prefix.clone();
                    v.push(p);
                    v
                })
            })
            .collect();
    }
    VectorAlphabet {
        vectors,
        dims: components.len(),
    }
}

/// Alphabets carried by the private streams (shared by all users) and the
/// common stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TransmissionMode {
    pub private: ConstellationKind,
    pub common: ConstellationKind,
}

impl TransmissionMode {
    pub fn new(private: ConstellationKind, common: ConstellationKind) -> Self {
        TransmissionMode { private, common }
    }

    /// Number of metric evaluations per received symbol, `|X_c|·|X_p|`.
    pub fn complexity(&self) -> usize {
        self.private.order() * self.common.order()
    }

    /// Private streams only.
    pub fn is_sdma(&self) -> bool {
        self.common == ConstellationKind::Null
    }

    /// Common stream only.
    pub fn is_multicast(&self) -> bool {
        self.private == ConstellationKind::Null
    }

    pub fn private_alphabet(&self) -> Alphabet {
        make_constellation(self.private)
    }

    pub fn common_alphabet(&self) -> Alphabet {
        make_constellation(self.common)
    }

    /// Per-user rate ceiling `log2|X_p| + log2|X_c|` in bits.
    pub fn rate_cap_bits(&self) -> f64 {
        (self.complexity() as f64).log2()
    }

    /// Compact stable name such as `qam8+bpsk` (private first).
    pub fn name(&self) -> String {
        format!("{}+{}", self.private.name(), self.common.name())
    }
}

impl fmt::Display for TransmissionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "private {} / common {}",
            self.private.table_label(),
            self.common.table_label()
        )
    }
}

impl FromStr for TransmissionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (p, c) = s
            .split_once('+')
            .ok_or_else(|| Error::UnknownConstellation(s.to_string()))?;
        Ok(TransmissionMode::new(p.parse()?, c.parse()?))
    }
}

/// Enumerates every (private, common) pair whose complexity equals `delta`,
/// ordered by decreasing private cardinality. Mode 1 is always SDMA and the
/// last mode is always multicast.
pub fn modes_for_complexity(delta: usize) -> Result<Vec<TransmissionMode>> {
    if !matches!(delta, 2 | 4 | 8 | 16) {
        return Err(Error::InvalidComplexity(delta));
    }
    let mut modes: Vec<TransmissionMode> = ConstellationKind::ALL
        .iter()
        .rev()
        .filter(|p| delta % p.order() == 0)
        .filter_map(|&p| {
            ConstellationKind::from_order(delta / p.order()).map(|c| TransmissionMode::new(p, c))
        })
        .collect();
    modes.sort_by_key(|m| std::cmp::Reverse(m.private.order()));
    Ok(modes)
}
