//! Initial and final vector codes for split conversion.
//!
//! The message `m` has `alpha * kI` coordinates. Data symbol `j` of final
//! codeword `i` holds coordinates `(i-1)*kF*alpha + (j-1)*alpha + l` for
//! instances `l = 1..=alpha`.
//!
//! All index arguments in this module (final codeword `i`, parity `t`,
//! instance `l`, block coordinates) are 1-based, matching the construction
//! formulas. [`VectorCode`] accessors take 0-based storage positions.
//!
//! Two cases are handled:
//!
//! * `SplitDown` (`rI > rF`): `alpha = (lambda-1)*rF + rI`. Instances form
//!   `lambda` permuted blocks of `rF` plus a tail of `rI - rF`. Parities
//!   above `rF` carry piggybacks holding the tail of one final codeword.
//! * `SplitUp` (`rI <= rF`): `alpha = lambda*rF`, all instances permuted.
//!   Columns `rI+1..=rF` of each block carry piggybacks holding final
//!   parities `rI+1..=rF` of the first `rI` instances.
//!
//! In `SplitDown` the tail of final parity `t` mixes in parity `rF + l2`
//! of block-1 data ("extra data"). Each of the two terms is normalized by
//! its own parity's scaling factor so that every final codeword is encoded
//! by the same code; the initial piggyback on block `l1` carries the
//! matching factor `(xi_T / xi_l2)^((l1-1)kF)`.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::algebra::{Field, Gf, Matrix};
use crate::base::{search_points, search_points_where, EvaluationPoints};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ConversionCase {
    /// `rI > rF`
    SplitDown,
    /// `rI <= rF`
    SplitUp,
}

/// `(nI, kI; nF, kF)` with everything the construction derives from them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConversionParams {
    #[serde(rename = "ni")]
    pub n_i: usize,
    #[serde(rename = "ki")]
    pub k_i: usize,
    #[serde(rename = "nf")]
    pub n_f: usize,
    #[serde(rename = "kf")]
    pub k_f: usize,
    pub lambda_f: usize,
    #[serde(rename = "ri")]
    pub r_i: usize,
    #[serde(rename = "rf")]
    pub r_f: usize,
    pub alpha: usize,
    pub beta1: usize,
    pub beta2: usize,
    pub case: ConversionCase,
}

impl ConversionParams {
    pub fn derive(n_i: usize, k_i: usize, n_f: usize, k_f: usize) -> Result<Self> {
        if n_i == 0 || k_i == 0 || n_f == 0 || k_f == 0 {
            return Err(Error::InvalidParams("all counts must be positive".into()));
        }
        if n_i <= k_i || n_f <= k_f {
            return Err(Error::InvalidParams(format!(
                "need nI > kI and nF > kF, got ({n_i}, {k_i}; {n_f}, {k_f})"
            )));
        }
        if !k_i.is_multiple_of(k_f) || k_i / k_f < 2 {
            return Err(Error::NotSplitRegime { k_i, k_f });
        }
        let lambda_f = k_i / k_f;
        let r_i = n_i - k_i;
        let r_f = n_f - k_f;
        if r_f >= k_f {
            return Err(Error::NoSavings { r_f, k_f });
        }
        let (case, alpha, beta1, beta2) = if r_i > r_f {
            (
                ConversionCase::SplitDown,
                (lambda_f - 1) * r_f + r_i,
                (lambda_f - 1) * r_f,
                lambda_f * r_f,
            )
        } else {
            (
                ConversionCase::SplitUp,
                lambda_f * r_f,
                lambda_f * r_f - r_i,
                lambda_f * r_f,
            )
        };
        Ok(ConversionParams {
            n_i,
            k_i,
            n_f,
            k_f,
            lambda_f,
            r_i,
            r_f,
            alpha,
            beta1,
            beta2,
            case,
        })
    }

    /// Number of evaluation points shared by both codes.
    pub fn max_r(&self) -> usize {
        self.r_i.max(self.r_f)
    }

    /// Read bandwidth of the construction, in subsymbols.
    pub fn gamma_read(&self) -> usize {
        self.lambda_f * self.k_f * self.beta1 + self.r_i * self.beta2
    }

    /// Write bandwidth, in subsymbols.
    pub fn gamma_write(&self) -> usize {
        self.lambda_f * self.r_f * self.alpha
    }

    fn check_instance(&self, l: usize) -> Result<()> {
        if l == 0 || l > self.alpha {
            return Err(Error::IndexOutOfRange {
                what: "instance",
                index: l,
                max: self.alpha,
            });
        }
        Ok(())
    }

    fn check_codeword(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.lambda_f {
            return Err(Error::IndexOutOfRange {
                what: "final codeword",
                index: i,
                max: self.lambda_f,
            });
        }
        Ok(())
    }

    /// Message coordinate (0-based) of data symbol `j` of codeword `i`, instance `l`.
    pub fn coord(&self, i: usize, j: usize, l: usize) -> usize {
        (i - 1) * self.k_f * self.alpha + (j - 1) * self.alpha + (l - 1)
    }
}

/// `(l1, l2)`: block index and offset within the block.
pub fn block_coords(l: usize, params: &ConversionParams) -> Result<(usize, usize)> {
    params.check_instance(l)?;
    let r_f = params.r_f;
    let lambda = params.lambda_f;
    Ok(match params.case {
        ConversionCase::SplitDown if l > lambda * r_f => (lambda + 1, l - lambda * r_f),
        _ => (l.div_ceil(r_f), (l - 1) % r_f + 1),
    })
}

/// Instance of codeword `i` that sits at logical position `l` once that
/// codeword's first `lambda` blocks are rotated right by `i - 1`.
pub fn permuted_instance(l: usize, i: usize, params: &ConversionParams) -> Result<usize> {
    params.check_codeword(i)?;
    let (l1, l2) = block_coords(l, params)?;
    if l1 > params.lambda_f {
        return Err(Error::IndexOutOfRange {
            what: "permuted block",
            index: l1,
            max: params.lambda_f,
        });
    }
    let block = (l1 as i64 - i as i64).rem_euclid(params.lambda_f as i64) as usize;
    Ok(block * params.r_f + l2)
}

fn check_parity(t: usize, max: usize) -> Result<()> {
    if t == 0 || t > max {
        return Err(Error::IndexOutOfRange {
            what: "parity",
            index: t,
            max,
        });
    }
    Ok(())
}

// dst += coef * p^{(i)}_{t,l}
#[allow(clippy::too_many_arguments)]
fn add_projection(
    field: &Field,
    dst: &mut [Gf],
    coef: Gf,
    i: usize,
    t: usize,
    l: usize,
    params: &ConversionParams,
    points: &EvaluationPoints,
) -> Result<()> {
    let xi = points.point(t)?;
    let offset = (i - 1) * params.k_f;
    for j in 1..=params.k_f {
        let h = field.pow(xi, (offset + j - 1) as i64)?;
        dst[params.coord(i, j, l)] += field.mul(coef, h);
    }
    Ok(())
}

/// `p^{(i)}_{t,l}`: base-code parity `t` of codeword `i`'s data at instance
/// `l`, embedded in the full `alpha * kI` message space.
pub fn projection_vector(
    field: &Field,
    i: usize,
    t: usize,
    l: usize,
    params: &ConversionParams,
    points: &EvaluationPoints,
) -> Result<Vec<Gf>> {
    params.check_codeword(i)?;
    check_parity(t, params.max_r())?;
    params.check_instance(l)?;
    let mut v = vec![Gf::ZERO; params.alpha * params.k_i];
    add_projection(field, &mut v, Gf::ONE, i, t, l, params, points)?;
    Ok(v)
}

/// `xi_t^(-(i-1)kF)`.
pub fn scaling_factor(
    field: &Field,
    t: usize,
    i: usize,
    params: &ConversionParams,
    points: &EvaluationPoints,
) -> Result<Gf> {
    let xi = points.point(t)?;
    Ok(field.pow(xi, -(((i - 1) * params.k_f) as i64))?)
}

// Factor on the SplitDown piggyback of parity `t` in block `l1` at offset
// `l2`, so that recovered content rescales to a codeword-independent value.
fn piggyback_coefficient(
    field: &Field,
    t: usize,
    l1: usize,
    l2: usize,
    params: &ConversionParams,
    points: &EvaluationPoints,
) -> Result<Gf> {
    let ratio = field.div(points.point(t)?, points.point(l2)?)?;
    Ok(field.pow(ratio, ((l1 - 1) * params.k_f) as i64)?)
}

/// Sum of the base-code parity `t` over all codewords at instance `l`,
/// each codeword contributing its permuted instance when `permute` holds.
fn base_sum(
    field: &Field,
    t: usize,
    l: usize,
    permute: bool,
    params: &ConversionParams,
    points: &EvaluationPoints,
) -> Result<Vec<Gf>> {
    let mut v = vec![Gf::ZERO; params.alpha * params.k_i];
    for i in 1..=params.lambda_f {
        let li = if permute {
            permuted_instance(l, i, params)?
        } else {
            l
        };
        add_projection(field, &mut v, Gf::ONE, i, t, li, params, points)?;
    }
    Ok(v)
}

/// The piggyback term added to initial parity `t` at instance `l`, if any.
pub fn initial_piggyback(
    field: &Field,
    t: usize,
    l: usize,
    params: &ConversionParams,
    points: &EvaluationPoints,
) -> Result<Option<Vec<Gf>>> {
    check_parity(t, params.r_i)?;
    let (l1, l2) = block_coords(l, params)?;
    let mut v = vec![Gf::ZERO; params.alpha * params.k_i];
    match params.case {
        ConversionCase::SplitDown => {
            if l1 > params.lambda_f || t <= params.r_f {
                return Ok(None);
            }
            let coef = piggyback_coefficient(field, t, l1, l2, params, points)?;
            let target = (params.lambda_f - 1) * params.r_f + t;
            add_projection(field, &mut v, coef, l1, l2, target, params, points)?;
        }
        ConversionCase::SplitUp => {
            if l2 <= params.r_i {
                return Ok(None);
            }
            add_projection(field, &mut v, Gf::ONE, l1, l2, t, params, points)?;
        }
    }
    Ok(Some(v))
}

/// `q^I_{t,l}`: encoding vector of initial parity `t`, instance `l`.
pub fn initial_encoding_vector(
    field: &Field,
    t: usize,
    l: usize,
    params: &ConversionParams,
    points: &EvaluationPoints,
) -> Result<Vec<Gf>> {
    check_parity(t, params.r_i)?;
    let (l1, _) = block_coords(l, params)?;
    let permute = l1 <= params.lambda_f;
    let mut v = base_sum(field, t, l, permute, params, points)?;
    if let Some(pb) = initial_piggyback(field, t, l, params, points)? {
        for (d, s) in v.iter_mut().zip(pb) {
            *d += s;
        }
    }
    Ok(v)
}

/// `q^{F(i)}_{t,l}`: encoding vector of parity `t`, instance `l` of final
/// codeword `i`, in the full message space.
pub fn final_encoding_vector(
    field: &Field,
    i: usize,
    t: usize,
    l: usize,
    params: &ConversionParams,
    points: &EvaluationPoints,
) -> Result<Vec<Gf>> {
    params.check_codeword(i)?;
    check_parity(t, params.r_f)?;
    let (l1, l2) = block_coords(l, params)?;
    let mut v = vec![Gf::ZERO; params.alpha * params.k_i];
    let scale = scaling_factor(field, t, i, params, points)?;
    add_projection(field, &mut v, scale, i, t, l, params, points)?;
    if params.case == ConversionCase::SplitDown && l1 > params.lambda_f {
        let extra = params.r_f + l2;
        let extra_scale = scaling_factor(field, extra, i, params, points)?;
        add_projection(field, &mut v, extra_scale, i, extra, t, params, points)?;
    }
    Ok(v)
}

/// `[n, k, alpha]` linear vector code given by one encoding column per
/// subsymbol: subsymbol `(s, l)` of `encode(m)` is `m . column(s, l)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorCode {
    pub n: usize,
    pub k: usize,
    pub alpha: usize,
    pub field: &'static Field,
    columns: Vec<Vec<Gf>>,
}

impl VectorCode {
    /// `columns[s * alpha + l]` is the column of symbol `s`, instance `l` (0-based).
    pub fn new(
        field: &'static Field,
        n: usize,
        k: usize,
        alpha: usize,
        columns: Vec<Vec<Gf>>,
    ) -> Result<Self> {
        if columns.len() != n * alpha {
            return Err(Error::LengthMismatch {
                expected: n * alpha,
                found: columns.len(),
            });
        }
        if let Some(bad) = columns.iter().find(|c| c.len() != alpha * k) {
            return Err(Error::LengthMismatch {
                expected: alpha * k,
                found: bad.len(),
            });
        }
        Ok(VectorCode {
            n,
            k,
            alpha,
            field,
            columns,
        })
    }

    pub fn message_len(&self) -> usize {
        self.alpha * self.k
    }

    pub fn column(&self, symbol: usize, instance: usize) -> &[Gf] {
        &self.columns[symbol * self.alpha + instance]
    }

    pub fn columns(&self) -> &[Vec<Gf>] {
        &self.columns
    }

    /// The `alpha*k x alpha*n` generator matrix.
    pub fn generator(&self) -> Matrix {
        Matrix::from_columns(&self.columns).expect("columns have equal length")
    }

    /// `alpha*k x alpha*|symbols|` matrix of the given symbols' columns.
    pub fn symbol_matrix(&self, symbols: &[usize]) -> Matrix {
        let cols: Vec<Vec<Gf>> = symbols
            .iter()
            .flat_map(|&s| (0..self.alpha).map(move |l| self.column(s, l).to_vec()))
            .collect();
        Matrix::from_columns(&cols).expect("columns have equal length")
    }

    fn systematic_column(k: usize, alpha: usize, s: usize, l: usize) -> Vec<Gf> {
        let mut c = vec![Gf::ZERO; alpha * k];
        c[s * alpha + l] = Gf::ONE;
        c
    }
}

#[derive(Serialize, Deserialize)]
struct VectorCodeJson {
    n: usize,
    k: usize,
    alpha: usize,
    field_poly: u16,
    columns: Vec<Vec<Vec<u8>>>,
}

impl Serialize for VectorCode {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let columns = (0..self.n)
            .map(|s| {
                (0..self.alpha)
                    .map(|l| self.column(s, l).iter().map(|g| g.0).collect())
                    .collect()
            })
            .collect();
        VectorCodeJson {
            n: self.n,
            k: self.k,
            alpha: self.alpha,
            field_poly: self.field.poly(),
            columns,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for VectorCode {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = VectorCodeJson::deserialize(deserializer)?;
        let field = Field::get(raw.field_poly).map_err(D::Error::custom)?;
        let columns = raw
            .columns
            .into_iter()
            .flatten()
            .map(|c| c.into_iter().map(Gf).collect())
            .collect();
        VectorCode::new(field, raw.n, raw.k, raw.alpha, columns).map_err(D::Error::custom)
    }
}

fn check_points(params: &ConversionParams, points: &EvaluationPoints) -> Result<()> {
    if points.len() < params.max_r() {
        return Err(Error::InvalidPoints(format!(
            "need {} evaluation points, got {}",
            params.max_r(),
            points.len()
        )));
    }
    Ok(())
}

/// `[nI, kI, alpha]` initial code: systematic data symbols followed by the
/// `rI` piggybacked parities.
pub fn build_initial_code(
    field: &'static Field,
    params: &ConversionParams,
    points: &EvaluationPoints,
) -> Result<VectorCode> {
    check_points(params, points)?;
    let (k, alpha) = (params.k_i, params.alpha);
    let mut columns = Vec::with_capacity(params.n_i * alpha);
    for s in 0..k {
        for l in 0..alpha {
            columns.push(VectorCode::systematic_column(k, alpha, s, l));
        }
    }
    for t in 1..=params.r_i {
        for l in 1..=alpha {
            columns.push(initial_encoding_vector(field, t, l, params, points)?);
        }
    }
    VectorCode::new(field, params.n_i, k, alpha, columns)
}

/// `[nF, kF, alpha]` final code over one codeword's `alpha * kF` message
/// coordinates. Fails if any final codeword's parities, restricted to its
/// own coordinates, differ from codeword 1's.
pub fn build_final_code(
    field: &'static Field,
    params: &ConversionParams,
    points: &EvaluationPoints,
) -> Result<VectorCode> {
    check_points(params, points)?;
    let (k, alpha) = (params.k_f, params.alpha);
    let span = k * alpha;
    let mut parity_columns: Option<Vec<Vec<Gf>>> = None;
    for i in 1..=params.lambda_f {
        let lo = (i - 1) * span;
        let mut cols = Vec::with_capacity(params.r_f * alpha);
        for t in 1..=params.r_f {
            for l in 1..=alpha {
                let v = final_encoding_vector(field, i, t, l, params, points)?;
                if v[..lo].iter().chain(&v[lo + span..]).any(|g| !g.is_zero()) {
                    return Err(Error::Construction(format!(
                        "final parity {t} instance {l} of codeword {i} reads other codewords"
                    )));
                }
                cols.push(v[lo..lo + span].to_vec());
            }
        }
        match &parity_columns {
            None => parity_columns = Some(cols),
            Some(first) if *first != cols => {
                return Err(Error::Construction(format!(
                    "final codeword {i} is encoded differently from codeword 1"
                )));
            }
            Some(_) => {}
        }
    }
    let mut columns = Vec::with_capacity(params.n_f * alpha);
    for s in 0..k {
        for l in 0..alpha {
            columns.push(VectorCode::systematic_column(k, alpha, s, l));
        }
    }
    columns.extend(parity_columns.unwrap_or_default());
    VectorCode::new(field, params.n_f, k, alpha, columns)
}

/// True iff every k-subset of symbols yields an invertible `alpha*k` square system.
pub fn verify_mds_vector(code: &VectorCode) -> bool {
    let dim = code.alpha * code.k;
    (0..code.n)
        .combinations(code.k)
        .all(|subset| code.symbol_matrix(&subset).rank(code.field) == dim)
}

/// Parameters, shared evaluation points, and both codes.
#[derive(Debug, Clone)]
pub struct Construction {
    pub field: &'static Field,
    pub params: ConversionParams,
    pub points: EvaluationPoints,
    pub initial: VectorCode,
    pub final_code: VectorCode,
}

impl Construction {
    /// Searches the first point tuple certifying the `[kI + max_r, kI]`
    /// scalar code and builds both codes from it.
    pub fn new(field: &'static Field, params: ConversionParams) -> Result<Self> {
        let points = search_points(
            field,
            params.k_i + params.max_r(),
            params.k_i,
            params.max_r(),
        )?;
        Construction::with_points(field, params, points)
    }

    /// Like [`Construction::new`], but also checks both vector codes
    /// exhaustively and moves on to the next point tuple on failure.
    pub fn new_verified(field: &'static Field, params: ConversionParams) -> Result<Self> {
        let mut built = None;
        search_points_where(
            field,
            params.k_i,
            params.max_r(),
            |p| match Construction::with_points(field, params.clone(), p.clone()) {
                Ok(c) if verify_mds_vector(&c.final_code) && verify_mds_vector(&c.initial) => {
                    built = Some(c);
                    true
                }
                _ => false,
            },
        )?;
        built.ok_or_else(|| Error::Construction("search accepted without a construction".into()))
    }

    pub fn with_points(
        field: &'static Field,
        params: ConversionParams,
        points: EvaluationPoints,
    ) -> Result<Self> {
        let initial = build_initial_code(field, &params, &points)?;
        let final_code = build_final_code(field, &params, &points)?;
        Ok(Construction {
            field,
            params,
            points,
            initial,
            final_code,
        })
    }
}
