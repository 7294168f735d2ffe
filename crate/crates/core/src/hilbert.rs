//! Truncated canonical representation space of the rigid rotor.
//!
//! The canonical basis |j,k,m> diagonalizes J², the molecular projection
//! J^M_0 (eigenvalue k) and the laboratory projection J^L_0 (eigenvalue m).
//! For fixed j the labels span the (2j+1)²-dimensional block h_j, and the
//! full space is the direct sum over a tower of j values: either all
//! half-integers (0, 1/2, 1, ...) or integers only. All quantum numbers are
//! stored doubled (2j, 2k, 2m) so half-integers stay exact integers.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::McsError;

/// Which tower of j values the space is built over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tower {
    /// j = 0, 1/2, 1, 3/2, ... (every nonnegative value of 2j).
    HalfInteger,
    /// j = 0, 1, 2, ... (even 2j only).
    Integer,
}

impl Tower {
    /// Step between consecutive admissible values of 2j.
    pub fn two_j_step(self) -> u32 {
        match self {
            Tower::HalfInteger => 1,
            Tower::Integer => 2,
        }
    }

    /// Whether a doubled angular momentum belongs to this tower.
    pub fn admits(self, two_j: u32) -> bool {
        match self {
            Tower::HalfInteger => true,
            Tower::Integer => two_j.is_multiple_of(2),
        }
    }
}

impl fmt::Display for Tower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tower::HalfInteger => write!(f, "half"),
            Tower::Integer => write!(f, "integer"),
        }
    }
}

/// A canonical basis label (j, k, m), stored doubled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisLabel {
    pub two_j: u32,
    pub two_k: i32,
    pub two_m: i32,
}

impl BasisLabel {
    /// Build a label, enforcing |k| <= j, |m| <= j and parity matching.
    pub fn new(two_j: u32, two_k: i32, two_m: i32) -> Result<Self, McsError> {
        let label = BasisLabel { two_j, two_k, two_m };
        if label.is_valid() {
            Ok(label)
        } else {
            Err(McsError::InvalidLabel { two_j, two_k, two_m })
        }
    }

    /// Range and parity checks for (j, k, m).
    pub fn is_valid(&self) -> bool {
        let j = self.two_j as i32;
        self.two_k.abs() <= j
            && self.two_m.abs() <= j
            && (self.two_k - j) % 2 == 0
            && (self.two_m - j) % 2 == 0
    }

    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    pub fn k(&self) -> f64 {
        self.two_k as f64 / 2.0
    }

    pub fn m(&self) -> f64 {
        self.two_m as f64 / 2.0
    }

    /// The stretched label (j, -j, -j) carrying the fundamental states.
    pub fn stretched(two_j: u32) -> Self {
        BasisLabel {
            two_j,
            two_k: -(two_j as i32),
            two_m: -(two_j as i32),
        }
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},{},{}>", self.two_j, self.two_k, self.two_m)
    }
}

/// A truncated direct sum of blocks h_j with j <= j_max over a tower.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpaceSpec {
    pub two_j_max: u32,
    pub tower: Tower,
}

impl SpaceSpec {
    pub fn new(two_j_max: u32, tower: Tower) -> Self {
        SpaceSpec { two_j_max, tower }
    }

    /// Admissible 2j values, ascending.
    pub fn two_js(&self) -> impl Iterator<Item = u32> + '_ {
        (0..=self.two_j_max).step_by(self.tower.two_j_step() as usize)
    }

    /// Total dimension, sum of (2j+1)² over the tower.
    pub fn dim(&self) -> usize {
        self.two_js()
            .map(|tj| {
                let n = tj as usize + 1;
                n * n
            })
            .sum()
    }

    pub fn contains(&self, label: &BasisLabel) -> bool {
        label.is_valid() && label.two_j <= self.two_j_max && self.tower.admits(label.two_j)
    }
}

/// Deterministic basis enumeration: ascending 2j, then 2k, then 2m.
pub fn enumerate_basis(space: &SpaceSpec) -> Vec<BasisLabel> {
    let mut labels = Vec::with_capacity(space.dim());
    for two_j in space.two_js() {
        let j = two_j as i32;
        for two_k in (-j..=j).step_by(2) {
            for two_m in (-j..=j).step_by(2) {
                labels.push(BasisLabel { two_j, two_k, two_m });
            }
        }
    }
    labels
}

/// A state vector over a truncated space, sparse over basis labels.
///
/// Fundamental states occupy only the stretched labels (j,-j,-j), so a
/// coefficient map is used instead of a dense array.
#[derive(Clone, Debug)]
pub struct TruncatedState {
    space: SpaceSpec,
    coeffs: HashMap<BasisLabel, Complex64>,
}

impl TruncatedState {
    /// The zero state.
    pub fn zero(space: SpaceSpec) -> Self {
        TruncatedState {
            space,
            coeffs: HashMap::new(),
        }
    }

    /// A single basis vector with unit amplitude.
    pub fn basis_vector(space: SpaceSpec, label: BasisLabel) -> Result<Self, McsError> {
        let mut s = TruncatedState::zero(space);
        s.set(label, Complex64::new(1.0, 0.0))?;
        Ok(s)
    }

    pub fn space(&self) -> SpaceSpec {
        self.space
    }

    pub fn amplitude(&self, label: &BasisLabel) -> Complex64 {
        self.coeffs
            .get(label)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Set one amplitude; the label must lie inside the space.
    pub fn set(&mut self, label: BasisLabel, amp: Complex64) -> Result<(), McsError> {
        if !self.space.contains(&label) {
            return Err(McsError::LabelOutsideSpace {
                two_j: label.two_j,
                two_k: label.two_k,
                two_m: label.two_m,
                two_j_max: self.space.two_j_max,
            });
        }
        if amp == Complex64::new(0.0, 0.0) {
            self.coeffs.remove(&label);
        } else {
            self.coeffs.insert(label, amp);
        }
        Ok(())
    }

    /// Accumulate into one amplitude (label assumed pre-validated).
    pub(crate) fn add_unchecked(&mut self, label: BasisLabel, amp: Complex64) {
        *self.coeffs.entry(label).or_insert(Complex64::new(0.0, 0.0)) += amp;
    }

    /// Iterate over the nonzero amplitudes in unspecified order.
    pub fn iter(&self) -> impl Iterator<Item = (&BasisLabel, &Complex64)> {
        self.coeffs.iter()
    }

    /// Nonzero amplitudes sorted by label, for deterministic output.
    pub fn sorted_entries(&self) -> Vec<(BasisLabel, Complex64)> {
        let mut entries: Vec<_> = self.coeffs.iter().map(|(l, a)| (*l, *a)).collect();
        entries.sort_by_key(|(l, _)| *l);
        entries
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    /// Squared norm, computed exactly as the sum of |coeff|².
    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, factor: Complex64) -> TruncatedState {
        let mut out = self.clone();
        for amp in out.coeffs.values_mut() {
            *amp *= factor;
        }
        out
    }

    /// self + factor * other. Spaces must match.
    pub fn add_scaled(&self, other: &TruncatedState, factor: Complex64) -> Result<TruncatedState, McsError> {
        if self.space != other.space {
            return Err(McsError::SpaceMismatch);
        }
        let mut out = self.clone();
        for (label, amp) in other.coeffs.iter() {
            out.add_unchecked(*label, factor * amp);
        }
        Ok(out)
    }

    /// Total weight carried by the top shell j = j_max.
    pub fn top_shell_weight(&self) -> f64 {
        self.coeffs
            .iter()
            .filter(|(l, _)| l.two_j == self.space.two_j_max)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Line-oriented text form: header `tower two_j_max`, then one
    /// `two_j two_k two_m re im` row per nonzero amplitude.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.space.tower, self.space.two_j_max);
        for (label, amp) in self.sorted_entries() {
            out.push_str(&format!(
                "{} {} {} {:.17e} {:.17e}\n",
                label.two_j, label.two_k, label.two_m, amp.re, amp.im
            ));
        }
        out
    }

    /// Parse the text form produced by [`TruncatedState::to_text`].
    pub fn from_text(text: &str) -> Result<Self, McsError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| McsError::Parse("empty state file".into()))?;
        let mut parts = header.split_whitespace();
        let tower = match parts.next() {
            Some("half") => Tower::HalfInteger,
            Some("integer") => Tower::Integer,
            other => {
                return Err(McsError::Parse(format!(
                    "bad tower in state header: {:?}",
                    other
                )))
            }
        };
        let two_j_max: u32 = parts
            .next()
            .ok_or_else(|| McsError::Parse("missing two_j_max in state header".into()))?
            .parse()
            .map_err(|e| McsError::Parse(format!("bad two_j_max: {e}")))?;
        let mut state = TruncatedState::zero(SpaceSpec::new(two_j_max, tower));
        for line in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 5 {
                return Err(McsError::Parse(format!("bad state row: {line:?}")));
            }
            let two_j: u32 = fields[0].parse().map_err(|e| McsError::Parse(format!("{e}")))?;
            let two_k: i32 = fields[1].parse().map_err(|e| McsError::Parse(format!("{e}")))?;
            let two_m: i32 = fields[2].parse().map_err(|e| McsError::Parse(format!("{e}")))?;
            let re: f64 = fields[3].parse().map_err(|e| McsError::Parse(format!("{e}")))?;
            let im: f64 = fields[4].parse().map_err(|e| McsError::Parse(format!("{e}")))?;
            let label = BasisLabel::new(two_j, two_k, two_m)?;
            state.set(label, Complex64::new(re, im))?;
        }
        Ok(state)
    }
}

/// Inner product <a|b>, conjugate-linear in the first argument.
pub fn inner_product(a: &TruncatedState, b: &TruncatedState) -> Result<Complex64, McsError> {
    if a.space != b.space {
        return Err(McsError::SpaceMismatch);
    }
    // Iterate the smaller support.
    let (small, large, conj_small) = if a.support_len() <= b.support_len() {
        (a, b, true)
    } else {
        (b, a, false)
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for (label, amp) in small.iter() {
        let other = large.amplitude(label);
        if conj_small {
            acc += amp.conj() * other;
        } else {
            acc += other.conj() * amp;
        }
    }
    Ok(acc)
}
