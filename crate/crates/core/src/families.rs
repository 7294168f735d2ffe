//! The c_j sequence families: norm functions N(x) = sum |c_j|^2 x^j, their
//! convergence domains, and the resolution-of-unity measures f whose Mellin
//! moments satisfy integral f(x) x^j dx = (2j+1)^2 / |c_j|^2.
//!
//! The moment variable x is |z|^2 throughout; measures tabulated in |z| are
//! converted through |z| = sqrt(x). Eight families are built in. Closed
//! norm forms are the ones implied by the coefficients themselves; for
//! family 3 this is (1 + 2|z|)/(1 - |z|)^4, which disagrees with the
//! published table entry (3|z| + 2)/(2 (1 - |z|)^4) -- the series is the
//! ground truth and the discrepancy is pinned down in the test fixtures.

use std::sync::Arc;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::McsError;
use crate::hilbert::Tower;
use crate::quad::{integrate_adaptive, integrate_semi_infinite};

fn factorial(n: u32) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![1.0f64];
        for k in 1..=170u32 {
            let prev = *t.last().unwrap();
            t.push(prev * k as f64);
        }
        t
    });
    if (n as usize) < table.len() {
        table[n as usize]
    } else {
        f64::INFINITY
    }
}

/// Binomial coefficient as f64; n stays below ~170 in this crate.
pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    debug_assert!(k <= n);
    factorial(n) / (factorial(k) * factorial(n - k))
}

#[derive(Clone, Debug)]
enum FamilyKind {
    Builtin(u8),
    Custom {
        /// c_j indexed by 2j; entries beyond the table are zero.
        coeffs: Arc<Vec<Complex64>>,
        radius: f64,
    },
    /// c_j = delta_{j, l}: the single-block family minimizing all three
    /// uncertainty pairs; no resolution of unity exists for it.
    Monomial { two_l: u32 },
}

/// A coefficient sequence c_j with its convergence domain and, when known,
/// closed norm function and measure.
#[derive(Clone, Debug)]
pub struct SequenceFamily {
    name: String,
    tower: Tower,
    kind: FamilyKind,
}

/// Support of a measure density in the x = |z|^2 variable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeasureSupport {
    /// Density vanishes for x > x_upper.
    Compact { x_upper: f64 },
    SemiInfinite,
}

/// Radial weight f(x) together with the moment targets it must reproduce.
#[derive(Clone)]
pub struct Measure {
    pub name: String,
    pub support: MeasureSupport,
    density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    target: Arc<dyn Fn(u32) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for Measure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Measure")
            .field("name", &self.name)
            .field("support", &self.support)
            .finish()
    }
}

impl Measure {
    pub fn new(
        name: impl Into<String>,
        support: MeasureSupport,
        density: impl Fn(f64) -> f64 + Send + Sync + 'static,
        target: impl Fn(u32) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Measure {
            name: name.into(),
            support,
            density: Arc::new(density),
            target: Arc::new(target),
        }
    }

    /// f(x), x = |z|^2. May be negative.
    pub fn density(&self, x: f64) -> f64 {
        (self.density)(x)
    }

    /// (2j+1)^2 / |c_j|^2 for the family this measure belongs to.
    pub fn moment_target(&self, two_j: u32) -> f64 {
        (self.target)(two_j)
    }

    /// integral_0^inf f(x) x^j dx, evaluated in the u = |z| variable where
    /// every built-in density is smooth on its support.
    pub fn moment_integral(&self, two_j: u32, tol: f64) -> Result<f64, McsError> {
        let density = self.density.clone();
        let integrand = move |u: f64| 2.0 * density(u * u) * u.powi(two_j as i32 + 1);
        match self.support {
            MeasureSupport::Compact { x_upper } => {
                integrate_adaptive(&integrand, 0.0, x_upper.sqrt(), tol)
            }
            MeasureSupport::SemiInfinite => integrate_semi_infinite(&integrand, tol),
        }
    }
}

/// Partial sum of a positive-term series with a ratio-test tail bound.
#[derive(Clone, Copy, Debug)]
pub struct SeriesSum {
    pub value: f64,
    pub tail_bound: f64,
    pub terms: usize,
}

/// Sum term(n) for n = 0, 1, ... until the measured ratio bound certifies a
/// relative tail below tol. Refuses to report convergence when the measured
/// ratio stays >= 1.
pub(crate) fn sum_with_ratio_guard(
    term: impl Fn(usize) -> f64,
    tol: f64,
    max_terms: usize,
) -> Result<SeriesSum, McsError> {
    let mut value = 0.0;
    let mut ratios: Vec<f64> = Vec::new();
    let mut prev: Option<f64> = None;
    for n in 0..max_terms {
        let t = term(n);
        value += t;
        if let Some(p) = prev {
            if p.abs() > 0.0 {
                ratios.push((t / p).abs());
                if ratios.len() > 5 {
                    ratios.remove(0);
                }
            }
        }
        prev = Some(t);
        if n >= 8 && ratios.len() == 5 {
            let ratio_sup = ratios.iter().cloned().fold(0.0, f64::max);
            if ratio_sup < 1.0 {
                let tail = t.abs() * ratio_sup / (1.0 - ratio_sup);
                if tail <= tol * value.abs().max(1e-300) {
                    return Ok(SeriesSum {
                        value,
                        tail_bound: tail,
                        terms: n + 1,
                    });
                }
            }
        }
    }
    let ratio = ratios.iter().cloned().fold(0.0, f64::max);
    if ratio >= 1.0 {
        Err(McsError::NonConvergentSeries {
            ratio,
            terms: max_terms,
        })
    } else {
        // Converging but slowly; report what we have with its bound.
        let tail = prev.unwrap_or(0.0).abs() * ratio / (1.0 - ratio).max(1e-300);
        Ok(SeriesSum {
            value,
            tail_bound: tail,
            terms: max_terms,
        })
    }
}

impl SequenceFamily {
    /// The eight published example families, 1-4 on the half-integer tower,
    /// 5-8 on the integer tower.
    pub fn builtin(id: u8) -> Result<Self, McsError> {
        if !(1..=8).contains(&id) {
            return Err(McsError::Parse(format!("builtin family id {id} not in 1..=8")));
        }
        let tower = if id <= 4 { Tower::HalfInteger } else { Tower::Integer };
        Ok(SequenceFamily {
            name: format!("family-{id}"),
            tower,
            kind: FamilyKind::Builtin(id),
        })
    }

    pub fn all_builtin() -> Vec<Self> {
        (1..=8).map(|id| Self::builtin(id).unwrap()).collect()
    }

    /// c_j = delta_{j, l} with 2l = two_l.
    pub fn monomial(two_l: u32, tower: Tower) -> Self {
        SequenceFamily {
            name: format!("monomial-{two_l}"),
            tower,
            kind: FamilyKind::Monomial { two_l },
        }
    }

    /// A finitely supported custom sequence; coeffs indexed by 2j.
    pub fn custom(
        name: impl Into<String>,
        tower: Tower,
        radius: f64,
        coeffs: Vec<Complex64>,
    ) -> Result<Self, McsError> {
        if coeffs.is_empty() || coeffs[0] == Complex64::new(0.0, 0.0) {
            return Err(McsError::Parse("custom family needs c_0 != 0".into()));
        }
        if radius <= 0.0 {
            return Err(McsError::Parse("custom family radius must be positive".into()));
        }
        if tower == Tower::Integer {
            for (two_j, c) in coeffs.iter().enumerate() {
                if two_j % 2 == 1 && *c != Complex64::new(0.0, 0.0) {
                    return Err(McsError::Parse(format!(
                        "integer tower requires c = 0 at 2j = {two_j}"
                    )));
                }
            }
        }
        Ok(SequenceFamily {
            name: name.into(),
            tower,
            kind: FamilyKind::Custom {
                coeffs: Arc::new(coeffs),
                radius,
            },
        })
    }

    /// Parse the config format: a header line `tower radius`, then one
    /// `two_j re im` row per coefficient.
    pub fn from_config_str(text: &str) -> Result<Self, McsError> {
        let mut lines = text
            .lines()
            .map(|l| l.trim())
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| McsError::Parse("empty family config".into()))?;
        let mut parts = header.split_whitespace();
        let tower = match parts.next() {
            Some("half") => Tower::HalfInteger,
            Some("integer") => Tower::Integer,
            other => return Err(McsError::Parse(format!("bad tower {other:?}"))),
        };
        let radius: f64 = parts
            .next()
            .ok_or_else(|| McsError::Parse("missing radius".into()))?
            .parse()
            .map_err(|e| McsError::Parse(format!("bad radius: {e}")))?;
        let mut coeffs: Vec<Complex64> = Vec::new();
        for line in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(McsError::Parse(format!("bad coefficient row: {line:?}")));
            }
            let two_j: usize = fields[0].parse().map_err(|e| McsError::Parse(format!("{e}")))?;
            let re: f64 = fields[1].parse().map_err(|e| McsError::Parse(format!("{e}")))?;
            let im: f64 = fields[2].parse().map_err(|e| McsError::Parse(format!("{e}")))?;
            if coeffs.len() <= two_j {
                coeffs.resize(two_j + 1, Complex64::new(0.0, 0.0));
            }
            coeffs[two_j] = Complex64::new(re, im);
        }
        Self::custom("custom", tower, radius, coeffs)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn tower(&self) -> Tower {
        self.tower
    }

    pub fn builtin_id(&self) -> Option<u8> {
        match self.kind {
            FamilyKind::Builtin(id) => Some(id),
            _ => None,
        }
    }

    /// c_j as a function of 2j.
    pub fn coeff(&self, two_j: u32) -> Complex64 {
        let n = two_j;
        let value = match &self.kind {
            FamilyKind::Builtin(id) => {
                let half = n as f64;
                match id {
                    1 => 1.0 / factorial(n).sqrt(),
                    2 => ((half + 1.0) / 2.0).sqrt() / factorial(n).sqrt(),
                    3 => (half + 1.0) * ((half + 2.0) / 2.0).sqrt(),
                    4 => (half + 1.0).powf(1.5),
                    5..=8 => {
                        if n % 2 == 1 {
                            0.0
                        } else {
                            match id {
                                5 => 1.0 / factorial(n / 2).sqrt(),
                                6 => (half + 1.0) / factorial(n / 2).sqrt(),
                                7 => (half + 1.0) * ((half + 2.0) / 2.0).sqrt(),
                                8 => (half + 1.0).powf(1.5),
                                _ => unreachable!(),
                            }
                        }
                    }
                    _ => unreachable!(),
                }
            }
            FamilyKind::Custom { coeffs, .. } => {
                return coeffs
                    .get(n as usize)
                    .copied()
                    .unwrap_or(Complex64::new(0.0, 0.0));
            }
            FamilyKind::Monomial { two_l } => {
                if n == *two_l {
                    1.0
                } else {
                    0.0
                }
            }
        };
        Complex64::new(value, 0.0)
    }

    pub fn coeff_abs_sqr(&self, two_j: u32) -> f64 {
        self.coeff(two_j).norm_sqr()
    }

    /// Supremum of admissible |z|.
    pub fn domain_radius(&self) -> f64 {
        match &self.kind {
            FamilyKind::Builtin(1 | 2 | 5 | 6) => f64::INFINITY,
            FamilyKind::Builtin(_) => 1.0,
            FamilyKind::Custom { radius, .. } => *radius,
            FamilyKind::Monomial { .. } => f64::INFINITY,
        }
    }

    fn check_domain(&self, x: f64) -> Result<(), McsError> {
        let r = self.domain_radius();
        let radius_sqr = r * r;
        if !x.is_finite() || x < 0.0 || x >= radius_sqr {
            return Err(McsError::DomainViolation { x, radius_sqr });
        }
        Ok(())
    }

    /// Closed form of N(x) where known; the series is the authority.
    pub fn closed_n(&self, x: f64) -> Option<f64> {
        let y = x.sqrt();
        match &self.kind {
            FamilyKind::Builtin(id) => Some(match id {
                1 => y.exp(),
                2 => 0.5 * (1.0 + y) * y.exp(),
                // Derived from the coefficients; the published entry
                // (3y + 2)/(2 (1-y)^4) does not match its own c_j.
                3 => (1.0 + 2.0 * y) / (1.0 - y).powi(4),
                4 => (y * y + 4.0 * y + 1.0) / (1.0 - y).powi(4),
                5 => x.exp(),
                6 => (4.0 * x * x + 8.0 * x + 1.0) * x.exp(),
                7 => (9.0 * x * x + 14.0 * x + 1.0) / (1.0 - x).powi(4),
                8 => ((1.0 + x) * (x * x + 22.0 * x + 1.0)) / (1.0 - x).powi(4),
                _ => unreachable!(),
            }),
            FamilyKind::Monomial { two_l } => Some(x.powf(*two_l as f64 / 2.0)),
            FamilyKind::Custom { .. } => None,
        }
    }

    /// (2j+1)^2 / |c_j|^2; infinite when c_j = 0.
    pub fn moment_target(&self, two_j: u32) -> f64 {
        let tj = two_j as f64;
        (tj + 1.0) * (tj + 1.0) / self.coeff_abs_sqr(two_j)
    }

    /// The measure f(x), when a closed form is known.
    pub fn measure(&self) -> Option<Measure> {
        let id = self.builtin_id()?;
        let me = self.clone();
        let target = move |two_j: u32| me.moment_target(two_j);
        let measure = match id {
            1 => Measure::new(
                "(|z|-1)/2 exp(-|z|)",
                MeasureSupport::SemiInfinite,
                |x: f64| {
                    let u = x.sqrt();
                    0.5 * (u - 1.0) * (-u).exp()
                },
                target,
            ),
            2 => Measure::new(
                "exp(-|z|)",
                MeasureSupport::SemiInfinite,
                |x: f64| (-x.sqrt()).exp(),
                target,
            ),
            3 | 7 => Measure::new(
                "theta(1-|z|)",
                MeasureSupport::Compact { x_upper: 1.0 },
                |_x: f64| 1.0,
                target,
            ),
            4 | 8 => Measure::new(
                "theta(1-|z|)/(2|z|)",
                MeasureSupport::Compact { x_upper: 1.0 },
                |x: f64| 0.5 / x.sqrt(),
                target,
            ),
            5 => Measure::new(
                "(4|z|^4-8|z|^2+1) exp(-|z|^2)",
                MeasureSupport::SemiInfinite,
                |x: f64| (4.0 * x * x - 8.0 * x + 1.0) * (-x).exp(),
                target,
            ),
            6 => Measure::new(
                "exp(-|z|^2)",
                MeasureSupport::SemiInfinite,
                |x: f64| (-x).exp(),
                target,
            ),
            _ => return None,
        };
        Some(measure)
    }
}

/// N(x) by direct summation with tail control; agrees with closed_n when one
/// is present.
pub fn norm_series(fam: &SequenceFamily, x: f64, tol: f64) -> Result<SeriesSum, McsError> {
    fam.check_domain(x)?;
    let y = x.sqrt();
    let step = fam.tower().two_j_step();
    sum_with_ratio_guard(
        |n| {
            let two_j = n as u32 * step;
            fam.coeff_abs_sqr(two_j) * y.powi(two_j as i32)
        },
        tol,
        8192,
    )
}

/// (N, N', N'') by term-differentiated series, same tail control.
///
/// At x = 0 the half-integer tower with c_{1/2} != 0 has a divergent N';
/// that case is reported as a domain violation.
pub fn norm_derivatives(
    fam: &SequenceFamily,
    x: f64,
    tol: f64,
) -> Result<(f64, f64, f64), McsError> {
    fam.check_domain(x)?;
    if x == 0.0 {
        let singular = fam.tower() == Tower::HalfInteger
            && (fam.coeff_abs_sqr(1) != 0.0 || fam.coeff_abs_sqr(3) != 0.0);
        if singular {
            return Err(McsError::DomainViolation {
                x: 0.0,
                radius_sqr: 0.0,
            });
        }
        // Only integer powers contribute: N'(0) = |c_1|^2, N''(0) = 2 |c_2|^2.
        return Ok((
            fam.coeff_abs_sqr(0),
            fam.coeff_abs_sqr(2),
            2.0 * fam.coeff_abs_sqr(4),
        ));
    }
    let y = x.sqrt();
    let step = fam.tower().two_j_step();
    let n_sum = sum_with_ratio_guard(
        |n| {
            let two_j = n as u32 * step;
            fam.coeff_abs_sqr(two_j) * y.powi(two_j as i32)
        },
        tol,
        8192,
    )?;
    // N'(x) = sum j |c_j|^2 x^{j-1}; the shared geometric tail makes the
    // same guard valid term by term.
    let d1 = sum_with_ratio_guard(
        |n| {
            let two_j = n as u32 * step;
            let j = two_j as f64 / 2.0;
            fam.coeff_abs_sqr(two_j) * j * y.powi(two_j as i32 - 2)
        },
        tol,
        8192,
    )?;
    let d2 = sum_with_ratio_guard(
        |n| {
            let two_j = n as u32 * step;
            let j = two_j as f64 / 2.0;
            fam.coeff_abs_sqr(two_j) * j * (j - 1.0) * y.powi(two_j as i32 - 4)
        },
        tol,
        8192,
    )?;
    Ok((n_sum.value, d1.value, d2.value))
}

/// N evaluated at a complex argument through its square root: the sum
/// sum_j |c_j|^2 w_sqrt^{2j}, which is the analytic continuation used by the
/// closed overlap formula. Requires |w_sqrt| < domain radius.
pub fn norm_series_complex(
    fam: &SequenceFamily,
    w_sqrt: Complex64,
    tol: f64,
) -> Result<Complex64, McsError> {
    fam.check_domain(w_sqrt.norm_sqr())?;
    let step = fam.tower().two_j_step() as usize;
    let step_pow = w_sqrt.powu(step as u32);
    let mut power = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut scale = 0.0f64;
    for n in 0..8192usize {
        let two_j = (n * step) as u32;
        let term = fam.coeff_abs_sqr(two_j) * power;
        acc += term;
        scale = scale.max(acc.norm());
        if n > 8 && term.norm() < tol * scale.max(1e-300) {
            return Ok(acc);
        }
        power *= step_pow;
    }
    Err(McsError::NonConvergentSeries {
        ratio: w_sqrt.norm(),
        terms: 8192,
    })
}

/// Total squared weight |c_j z^j|^2 of the shells with 2j >= two_j_start.
pub fn shell_tail_weight(
    fam: &SequenceFamily,
    abs_z: f64,
    two_j_start: u32,
) -> Result<f64, McsError> {
    let step = fam.tower().two_j_step();
    let start = two_j_start.div_ceil(step) * step;
    let sum = sum_with_ratio_guard(
        |n| {
            let two_j = start + n as u32 * step;
            fam.coeff_abs_sqr(two_j) * abs_z.powi(two_j as i32)
        },
        1e-12,
        8192,
    )?;
    Ok(sum.value + sum.tail_bound)
}

/// Smallest 2 j_max keeping the relative truncation tail of the fundamental
/// state below `rel_tail`, capped by the default policy: 2 j_max = 30 for
/// entire families, 80 for unit-disc families.
pub fn adequate_two_j_max(fam: &SequenceFamily, abs_z: f64, rel_tail: f64) -> Result<u32, McsError> {
    let cap = if fam.domain_radius().is_infinite() { 30 } else { 80 };
    let norm = norm_series(fam, abs_z * abs_z, 1e-14)?.value;
    let step = fam.tower().two_j_step();
    let mut two_j_max = step * 4;
    loop {
        let tail = shell_tail_weight(fam, abs_z, two_j_max + step)?;
        if tail <= rel_tail * norm || two_j_max >= cap {
            return Ok(two_j_max.min(cap));
        }
        two_j_max += step;
    }
}

/// Report of the Mellin moment condition over a set of j values.
#[derive(Clone, Debug)]
pub struct MellinReport {
    pub rows: Vec<MellinRow>,
}

#[derive(Clone, Copy, Debug)]
pub struct MellinRow {
    pub two_j: u32,
    pub integral: f64,
    pub target: f64,
    pub rel_defect: f64,
}

impl MellinReport {
    pub fn max_rel_defect(&self) -> f64 {
        self.rows.iter().map(|r| r.rel_defect).fold(0.0, f64::max)
    }
}

/// Quadrature check of integral f(x) x^j dx = (2j+1)^2/|c_j|^2 for the
/// listed (tower-representable) doubled j values.
pub fn mellin_moment_check(
    fam: &SequenceFamily,
    measure: &Measure,
    two_j_list: &[u32],
    quad_tol: f64,
) -> Result<MellinReport, McsError> {
    let mut rows = Vec::with_capacity(two_j_list.len());
    for &two_j in two_j_list {
        if !fam.tower().admits(two_j) {
            continue;
        }
        let target = measure.moment_target(two_j);
        if !target.is_finite() {
            return Err(McsError::DivergentIntegral(format!(
                "moment target infinite at 2j = {two_j} (c_j = 0)"
            )));
        }
        let integral = measure.moment_integral(two_j, quad_tol * target.abs())?;
        let rel_defect = (integral - target).abs() / target.abs();
        rows.push(MellinRow {
            two_j,
            integral,
            target,
            rel_defect,
        });
    }
    Ok(MellinReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    #[test]
    fn builtin_norm_table_values() {
        let f1 = SequenceFamily::builtin(1).unwrap();
        assert_relative_eq!(f1.closed_n(1.0).unwrap(), E, max_relative = 1e-15);
        let f5 = SequenceFamily::builtin(5).unwrap();
        assert_relative_eq!(f5.closed_n(1.0).unwrap(), E, max_relative = 1e-15);
        // Family 4 at |z| = 0.5: (0.25 + 2 + 1) / 0.5^4 = 52.
        let f4 = SequenceFamily::builtin(4).unwrap();
        assert_relative_eq!(f4.closed_n(0.25).unwrap(), 52.0, max_relative = 1e-14);
    }

    #[test]
    fn series_matches_closed_forms() {
        // The invariant behind table reproduction: 20 points per family.
        for fam in SequenceFamily::all_builtin() {
            let radius = fam.domain_radius().min(2.0);
            for i in 1..=20 {
                let y = 0.9 * radius * i as f64 / 20.0;
                let x = y * y;
                let series = norm_series(&fam, x, 1e-14).unwrap();
                let closed = fam.closed_n(x).unwrap();
                assert_relative_eq!(series.value, closed, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn series_at_zero_is_c0_squared() {
        for fam in SequenceFamily::all_builtin() {
            let series = norm_series(&fam, 0.0, 1e-14).unwrap();
            assert_relative_eq!(series.value, fam.coeff_abs_sqr(0), max_relative = 1e-15);
        }
    }

    #[test]
    fn domain_violation_outside_radius() {
        let f3 = SequenceFamily::builtin(3).unwrap();
        assert!(matches!(
            norm_series(&f3, 1.0, 1e-12),
            Err(McsError::DomainViolation { .. })
        ));
    }

    #[test]
    fn published_family3_norm_entry_disagrees_with_its_coefficients() {
        // The table prints N_3 = (3|z| + 2)/(2 (1-|z|)^4). Family 7 shares
        // the same c_j on the integer tower and its printed norm does match
        // the series, which pins the family-3 entry as the typo.
        let f3 = SequenceFamily::builtin(3).unwrap();
        let y: f64 = 0.5;
        let published = (3.0 * y + 2.0) / (2.0 * (1.0 - y).powi(4));
        let series = norm_series(&f3, y * y, 1e-14).unwrap().value;
        assert!((published - series).abs() / series > 1e-2);
        assert_relative_eq!(series, f3.closed_n(y * y).unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn derivative_values() {
        // Family 5: N = e^x, so N'(0) = 1.
        let f5 = SequenceFamily::builtin(5).unwrap();
        let (n, d1, d2) = norm_derivatives(&f5, 0.0, 1e-12).unwrap();
        assert_relative_eq!(n, 1.0, max_relative = 1e-14);
        assert_relative_eq!(d1, 1.0, max_relative = 1e-14);
        assert_relative_eq!(d2, 1.0, max_relative = 1e-14);

        // Family 1: N = e^sqrt(x), N'(1) = e/2.
        let f1 = SequenceFamily::builtin(1).unwrap();
        let (n, d1, _) = norm_derivatives(&f1, 1.0, 1e-13).unwrap();
        assert_relative_eq!(n, E, max_relative = 1e-12);
        assert_relative_eq!(d1, E / 2.0, max_relative = 1e-12);

        // Half-integer tower at x = 0 is singular.
        assert!(norm_derivatives(&f1, 0.0, 1e-12).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for fam in SequenceFamily::all_builtin() {
            let x = if fam.domain_radius().is_finite() { 0.3 } else { 0.9 };
            let h = 1e-5;
            let (_, d1, d2) = norm_derivatives(&fam, x, 1e-13).unwrap();
            let np = norm_series(&fam, x + h, 1e-13).unwrap().value;
            let nm = norm_series(&fam, x - h, 1e-13).unwrap().value;
            let n0 = norm_series(&fam, x, 1e-13).unwrap().value;
            assert_relative_eq!(d1, (np - nm) / (2.0 * h), max_relative = 1e-6);
            assert_relative_eq!(d2, (np - 2.0 * n0 + nm) / (h * h), max_relative = 1e-4);
        }
    }

    #[test]
    fn mellin_frozen_values() {
        // Family 2: integral e^{-sqrt x} x^j dx = 2 (2j+1)! by x = t^2.
        let f2 = SequenceFamily::builtin(2).unwrap();
        let measure = f2.measure().unwrap();
        let j_half = measure.moment_integral(1, 1e-10).unwrap();
        assert_relative_eq!(j_half, 4.0, max_relative = 1e-9); // 2 * 2!
        assert_relative_eq!(measure.moment_target(1), 4.0, max_relative = 1e-12);
        let j_one = measure.moment_integral(2, 1e-10).unwrap();
        assert_relative_eq!(j_one, 12.0, max_relative = 1e-9); // 2 * 3!
        assert_relative_eq!(measure.moment_target(2), 12.0, max_relative = 1e-12);

        // Family 1 at j = 0: 2! - 1! = 1.
        let f1 = SequenceFamily::builtin(1).unwrap();
        let m1 = f1.measure().unwrap();
        assert_relative_eq!(m1.moment_integral(0, 1e-10).unwrap(), 1.0, max_relative = 1e-9);

        // Family 7 at j = 1: integral_0^1 x dx = 1/2 = 9 / (9 * 2).
        let f7 = SequenceFamily::builtin(7).unwrap();
        let m7 = f7.measure().unwrap();
        assert_relative_eq!(m7.moment_integral(2, 1e-12).unwrap(), 0.5, max_relative = 1e-11);
        assert_relative_eq!(m7.moment_target(2), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn mellin_condition_all_families() {
        for fam in SequenceFamily::all_builtin() {
            let measure = fam.measure().unwrap();
            let js: Vec<u32> = (0..=8).collect();
            let report = mellin_moment_check(&fam, &measure, &js, 1e-10).unwrap();
            assert!(
                report.max_rel_defect() <= 1e-8,
                "{}: defect {}",
                fam.name(),
                report.max_rel_defect()
            );
        }
    }

    #[test]
    fn measure_signs() {
        // Measures 1 and 5 change sign; the others stay nonnegative on
        // their support.
        for fam in SequenceFamily::all_builtin() {
            let id = fam.builtin_id().unwrap();
            let measure = fam.measure().unwrap();
            let upper = match measure.support {
                MeasureSupport::Compact { x_upper } => x_upper,
                MeasureSupport::SemiInfinite => 9.0,
            };
            let mut saw_negative = false;
            for i in 1..400 {
                let x = upper * i as f64 / 400.0;
                if measure.density(x) < 0.0 {
                    saw_negative = true;
                }
            }
            if id == 1 || id == 5 {
                assert!(saw_negative, "measure {id} should change sign");
            } else {
                assert!(!saw_negative, "measure {id} should stay nonnegative");
            }
        }
    }

    #[test]
    fn custom_family_config() {
        let text = "half 1.5\n0 1.0 0.0\n1 0.5 -0.25\n2 0.125 0.0\n";
        let fam = SequenceFamily::from_config_str(text).unwrap();
        assert_eq!(fam.tower(), Tower::HalfInteger);
        assert_relative_eq!(fam.domain_radius(), 1.5);
        assert_eq!(fam.coeff(1), Complex64::new(0.5, -0.25));
        assert_eq!(fam.coeff(7), Complex64::new(0.0, 0.0));

        assert!(SequenceFamily::from_config_str("half 1.0\n0 0.0 0.0\n").is_err());
        assert!(SequenceFamily::from_config_str("integer 1.0\n0 1.0 0.0\n1 1.0 0.0\n").is_err());
    }

    #[test]
    fn monomial_family_norm() {
        let fam = SequenceFamily::monomial(4, Tower::Integer);
        let s = norm_series(&fam, 0.7, 1e-12).unwrap();
        assert_relative_eq!(s.value, 0.7f64.powi(2), max_relative = 1e-14);
    }

    #[test]
    fn circle_restriction_norm_diverges() {
        // Restricting z to a circle forces |c_j z^j|^2 = (2j+1)^2, whose sum
        // fails the ratio test: the guard must refuse convergence.
        let result = sum_with_ratio_guard(
            |n| {
                let tj = n as f64;
                (tj + 1.0) * (tj + 1.0)
            },
            1e-10,
            2000,
        );
        assert!(matches!(result, Err(McsError::NonConvergentSeries { .. })));
    }

    #[test]
    fn complex_norm_series_matches_real_axis() {
        let fam = SequenceFamily::builtin(2).unwrap();
        let x = 1.3f64;
        let via_complex = norm_series_complex(&fam, Complex64::new(x.sqrt(), 0.0), 1e-14).unwrap();
        let direct = norm_series(&fam, x, 1e-14).unwrap().value;
        assert_relative_eq!(via_complex.re, direct, max_relative = 1e-12);
        assert!(via_complex.im.abs() < 1e-14);
    }

    #[test]
    fn adequate_truncation_controls_tail() {
        let fam = SequenceFamily::builtin(4).unwrap();
        let two_j_max = adequate_two_j_max(&fam, 0.5, 1e-14).unwrap();
        let norm = norm_series(&fam, 0.25, 1e-14).unwrap().value;
        let tail = shell_tail_weight(&fam, 0.5, two_j_max + 1).unwrap();
        assert!(tail <= 1e-13 * norm);
        assert!(two_j_max <= 80);
    }
}
