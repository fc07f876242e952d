//! Read-bandwidth baselines, lower bounds, and optimal download sizes for
//! split conversion.
//!
//! Every quantity is an exact rational multiple of `alpha`: a value `q`
//! stands for `q * alpha` subsymbols. Inputs are rational as well so that
//! curves can be drawn with `kI` normalized to 1.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::convertible::ConversionParams;
use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

/// Serde for [`Rational`]: whole values as JSON integers, others as `"n/d"`.
pub mod serde_rational {
    use super::Rational;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(i64),
        Text(String),
    }

    fn to_repr(q: &Rational) -> Repr {
        if q.is_integer() {
            Repr::Int(*q.numer())
        } else {
            Repr::Text(q.to_string())
        }
    }

    fn from_repr(r: Repr) -> Result<Rational, String> {
        match r {
            Repr::Int(n) => Ok(Rational::from_integer(n)),
            Repr::Text(s) => {
                let q: Rational = s
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad rational {s:?}"))?;
                Ok(q)
            }
        }
    }

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        to_repr(q).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        from_repr(Repr::deserialize(d)?).map_err(D::Error::custom)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(q: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            q.as_ref().map(to_repr).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
            Option::<Repr>::deserialize(d)?
                .map(from_repr)
                .transpose()
                .map_err(D::Error::custom)
        }
    }
}

/// Fixed-point decimal rendering, rounded half away from zero.
pub fn to_decimal(q: &Rational, digits: u32) -> String {
    let scale = 10i128.pow(digits);
    let n = *q.numer() as i128 * scale;
    let d = *q.denom() as i128;
    let mut v = n.abs() / d;
    if (n.abs() % d) * 2 >= d {
        v += 1;
    }
    let sign = if n < 0 && v != 0 { "-" } else { "" };
    if digits == 0 {
        return format!("{sign}{v}");
    }
    let (int, frac) = (v / scale, v % scale);
    format!("{sign}{int}.{frac:0width$}", width = digits as usize)
}

fn q(n: i64) -> Rational {
    Rational::from_integer(n)
}

fn min_q(a: Rational, b: Rational) -> Rational {
    if a < b {
        a
    } else {
        b
    }
}

fn max_q(a: Rational, b: Rational) -> Rational {
    if a > b {
        a
    } else {
        b
    }
}

/// `(lambda, kF, rI, rF)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub lambda_f: i64,
    #[serde(with = "serde_rational")]
    pub k_f: Rational,
    #[serde(with = "serde_rational")]
    pub r_i: Rational,
    #[serde(with = "serde_rational")]
    pub r_f: Rational,
}

impl BoundInputs {
    pub fn new(lambda_f: usize, k_f: usize, r_i: usize, r_f: usize) -> Result<Self> {
        BoundInputs::rational(lambda_f as i64, q(k_f as i64), q(r_i as i64), q(r_f as i64))
    }

    /// Non-integer counts, used when `kI` is normalized.
    pub fn rational(lambda_f: i64, k_f: Rational, r_i: Rational, r_f: Rational) -> Result<Self> {
        if lambda_f < 2 {
            return Err(Error::InvalidParams(format!(
                "lambda must be >= 2, got {lambda_f}"
            )));
        }
        if !(k_f.is_positive() && r_i.is_positive() && r_f.is_positive()) {
            return Err(Error::InvalidParams(
                "kF, rI and rF must be positive".into(),
            ));
        }
        Ok(BoundInputs {
            lambda_f,
            k_f,
            r_i,
            r_f,
        })
    }

    pub fn from_params(p: &ConversionParams) -> Self {
        BoundInputs::new(p.lambda_f, p.k_f, p.r_i, p.r_f).expect("derived params are valid")
    }

    fn lambda(&self) -> Rational {
        q(self.lambda_f)
    }

    // min(rF, kF)
    fn m(&self) -> Rational {
        min_q(self.r_f, self.k_f)
    }
}

/// Per-symbol download sizes as fractions of `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BetaAssignment {
    #[serde(with = "serde_rational")]
    pub beta1: Rational,
    #[serde(with = "serde_rational")]
    pub beta2: Rational,
}

impl BetaAssignment {
    pub fn new(beta1: Rational, beta2: Rational) -> Result<Self> {
        let unit = |b: Rational| !b.is_negative() && b <= Rational::one();
        if !unit(beta1) || !unit(beta2) {
            return Err(Error::InvalidParams(format!(
                "betas must lie in [0, alpha], got ({beta1}, {beta2}) * alpha"
            )));
        }
        Ok(BetaAssignment { beta1, beta2 })
    }

    /// From subsymbol counts at a concrete `alpha`.
    pub fn from_counts(beta1: usize, beta2: usize, alpha: usize) -> Result<Self> {
        if alpha == 0 {
            return Err(Error::InvalidParams("alpha must be positive".into()));
        }
        BetaAssignment::new(
            Rational::new(beta1 as i64, alpha as i64),
            Rational::new(beta2 as i64, alpha as i64),
        )
    }
}

/// `lambda * kF`.
pub fn gamma_read_default(b: &BoundInputs) -> Rational {
    b.lambda() * b.k_f
}

/// `(lambda-1) kF + rF` if `rI >= rF`, else the default.
pub fn gamma_read_access_optimal(b: &BoundInputs) -> Rational {
    if b.r_i >= b.r_f {
        (b.lambda() - 1) * b.k_f + b.r_f
    } else {
        gamma_read_default(b)
    }
}

pub fn bound_loose(b: &BoundInputs) -> Rational {
    if b.r_i <= b.lambda() * b.r_f {
        let saving = max_q(b.k_f / b.r_f - 1, Rational::zero());
        b.lambda() * b.k_f - b.r_i * saving
    } else {
        b.lambda() * b.m()
    }
}

/// Defined for `rI >= rF` and `rF <= kF`; use [`bound_loose`] elsewhere.
pub fn bound_tight(b: &BoundInputs) -> Result<Rational> {
    if b.r_i < b.r_f || b.r_f > b.k_f {
        return Err(Error::BoundRegion(format!(
            "tight bound needs rI >= rF and rF <= kF (rI = {}, rF = {}, kF = {}); use the loose bound",
            b.r_i, b.r_f, b.k_f
        )));
    }
    let l = b.lambda();
    Ok(l * b.r_f * ((l - 1) * b.k_f + b.r_i) / ((l - 1) * b.r_f + b.r_i))
}

/// `gamma_R = lambda kF beta1 + rI beta2`.
pub fn read_bandwidth(b: &BoundInputs, betas: &BetaAssignment) -> Rational {
    b.lambda() * b.k_f * betas.beta1 + b.r_i * betas.beta2
}

pub fn savings_possible(b: &BoundInputs) -> bool {
    b.r_f < b.k_f
}

/// Closed-form optimum of `gamma_R` under the cut constraint, and with the
/// conjectured `lambda beta1 >= (lambda-1) beta2` when `assume_conjecture`.
pub fn optimal_betas(b: &BoundInputs, assume_conjecture: bool) -> Result<BetaAssignment> {
    if !savings_possible(b) {
        return Err(Error::BoundRegion(format!(
            "rF = {} >= kF = {}: no savings region",
            b.r_f, b.k_f
        )));
    }
    let l = b.lambda();
    if assume_conjecture && b.r_i >= b.r_f {
        let d = (l - 1) * b.r_f + b.r_i;
        return BetaAssignment::new((l - 1) * b.r_f / d, l * b.r_f / d);
    }
    BetaAssignment::new(
        max_q(Rational::one() - b.r_i / (l * b.r_f), Rational::zero()),
        min_q(Rational::one(), l * b.r_f / b.r_i),
    )
}

/// Download sizes used by the piggyback construction.
pub fn construction_betas(p: &ConversionParams) -> BetaAssignment {
    BetaAssignment::from_counts(p.beta1, p.beta2, p.alpha).expect("construction betas fit in alpha")
}

/// Exhaustive scan of `{0, 1/steps, ..., 1}^2` for the smallest `gamma_R`
/// satisfying the cut constraint (and the conjecture, if flagged). Ties go
/// to smaller `beta1`, then smaller `beta2`.
pub fn grid_search_betas(
    b: &BoundInputs,
    assume_conjecture: bool,
    steps: usize,
) -> Result<BetaAssignment> {
    if steps < 100 {
        return Err(Error::InvalidParams(format!(
            "grid needs >= 100 steps, got {steps}"
        )));
    }
    // Clear denominators so the scan runs on integers.
    let den = [b.k_f, b.r_i, b.r_f]
        .iter()
        .fold(1i64, |acc, x| acc.lcm(x.denom()));
    let int = |x: Rational| (x * den).to_integer() as i128;
    let (l, kf, ri, m) = (b.lambda_f as i128, int(b.k_f), int(b.r_i), int(b.m()));
    let s = steps as i128;
    let mut best: Option<(i128, i128, i128)> = None;
    for a in 0..=s {
        for c in 0..=s {
            if l * m * s > l * m * a + ri * c {
                continue;
            }
            if assume_conjecture && l * a < (l - 1) * c {
                continue;
            }
            let cost = l * kf * a + ri * c;
            if best.is_none_or(|(bc, _, _)| cost < bc) {
                best = Some((cost, a, c));
            }
        }
    }
    let (_, a, c) = best.expect("beta1 = beta2 = alpha is always feasible");
    BetaAssignment::new(
        Rational::new(a as i64, steps as i64),
        Rational::new(c as i64, steps as i64),
    )
}

/// One sample of the relative read-bandwidth curve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CurvePoint {
    #[serde(with = "serde_rational")]
    pub rf_over_ri: Rational,
    #[serde(with = "serde_rational")]
    pub rel_default: Rational,
    #[serde(with = "serde_rational")]
    pub rel_access_opt: Rational,
    #[serde(with = "serde_rational")]
    pub rel_bound: Rational,
    pub achievable: bool,
}

/// Read bandwidth relative to the default for `rF/rI` sampled uniformly on
/// `(0, (lambda rI/kI)^-1]`. `example_kf` fixes the integer instance used
/// to flag points the construction can realize.
pub fn curve(
    lambda_f: usize,
    ri_over_ki: Rational,
    samples: usize,
    example_kf: usize,
) -> Result<Vec<CurvePoint>> {
    if samples < 2 {
        return Err(Error::InvalidParams(format!(
            "curve needs >= 2 samples, got {samples}"
        )));
    }
    if !ri_over_ki.is_positive() {
        return Err(Error::InvalidParams("rI/kI must be positive".into()));
    }
    let lambda = lambda_f as i64;
    let k_f = Rational::new(1, lambda);
    let r_i = ri_over_ki;
    let x_max = k_f / r_i;
    let example_ri = ri_over_ki * q(lambda * example_kf as i64);
    (1..=samples as i64)
        .map(|step| {
            let x = x_max * Rational::new(step, samples as i64);
            let b = BoundInputs::rational(lambda, k_f, r_i, x * r_i)?;
            let default = gamma_read_default(&b);
            let bound = if b.r_i >= b.r_f {
                bound_tight(&b)?
            } else {
                bound_loose(&b)
            };
            let example_rf = x * example_ri;
            let achievable = example_kf > 0
                && example_ri.is_integer()
                && example_rf.is_integer()
                && example_rf < q(example_kf as i64);
            Ok(CurvePoint {
                rf_over_ri: x,
                rel_default: Rational::one(),
                rel_access_opt: gamma_read_access_optimal(&b) / default,
                rel_bound: bound / default,
                achievable,
            })
        })
        .collect()
}

/// CSV with header `rf_over_ri,rel_default,rel_access_opt,rel_bound,achievable`.
pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("rf_over_ri,rel_default,rel_access_opt,rel_bound,achievable\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            to_decimal(&p.rf_over_ri, 6),
            to_decimal(&p.rel_default, 6),
            to_decimal(&p.rel_access_opt, 6),
            to_decimal(&p.rel_bound, 6),
            p.achievable
        ));
    }
    out
}

/// Rational to `f64`, for display only.
pub fn approx(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// `gamma_R` of the construction in subsymbols, computed from its betas.
pub fn construction_gamma_read(p: &ConversionParams) -> Rational {
    let b = BoundInputs::from_params(p);
    read_bandwidth(&b, &construction_betas(p)) * q(p.alpha as i64)
}

/// True when the construction meets `bound_loose` (`rI <= rF`) or
/// `bound_tight` (`rI >= rF`); both checks apply at `rI = rF`.
pub fn construction_is_optimal(p: &ConversionParams) -> bool {
    let b = BoundInputs::from_params(p);
    let gamma = read_bandwidth(&b, &construction_betas(p));
    let loose_ok = p.r_i > p.r_f || gamma == bound_loose(&b);
    let tight_ok = p.r_i < p.r_f || bound_tight(&b).is_ok_and(|t| t == gamma);
    loose_ok && tight_ok
}
