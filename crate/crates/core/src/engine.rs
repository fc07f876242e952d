//! Encoding, decoding, and the split conversion procedure with guarded,
//! counted downloads.

use std::collections::{BTreeSet, HashMap, HashSet};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraError, Field, Gf, Matrix};
use crate::base::EvaluationPoints;
use crate::bounds::{self, serde_rational, BoundInputs, Rational};
use crate::convertible::{scaling_factor, ConversionCase, ConversionParams, VectorCode};
use crate::error::{Error, Result};

/// `n` symbols of `alpha` subsymbols each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword {
    pub symbols: Vec<Vec<Gf>>,
}

impl Codeword {
    pub fn n(&self) -> usize {
        self.symbols.len()
    }

    pub fn alpha(&self) -> usize {
        self.symbols.first().map_or(0, Vec::len)
    }

    pub fn symbol(&self, s: usize) -> &[Gf] {
        &self.symbols[s]
    }

    fn check_shape(&self, n: usize, alpha: usize) -> Result<()> {
        if self.n() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: self.n(),
            });
        }
        if let Some(bad) = self.symbols.iter().find(|s| s.len() != alpha) {
            return Err(Error::LengthMismatch {
                expected: alpha,
                found: bad.len(),
            });
        }
        Ok(())
    }
}

/// Subsymbol `(s, l)` is `message . column(s, l)`.
pub fn encode(code: &VectorCode, message: &[Gf]) -> Result<Codeword> {
    if message.len() != code.message_len() {
        return Err(Error::LengthMismatch {
            expected: code.message_len(),
            found: message.len(),
        });
    }
    let symbols = (0..code.n)
        .map(|s| {
            (0..code.alpha)
                .map(|l| code.field.dot(message, code.column(s, l)))
                .collect()
        })
        .collect();
    Ok(Codeword { symbols })
}

/// Inverse of one k-subset's system, reusable across messages.
#[derive(Debug, Clone)]
pub struct Decoder {
    field: &'static Field,
    symbols: Vec<usize>,
    alpha: usize,
    inverse: Matrix,
}

impl Decoder {
    pub fn new(code: &VectorCode, symbols: &[usize]) -> Result<Self> {
        let distinct: BTreeSet<usize> = symbols.iter().copied().collect();
        if distinct.len() != code.k || symbols.len() != code.k {
            return Err(Error::WrongSymbolCount {
                expected: code.k,
                found: distinct.len(),
            });
        }
        if let Some(&s) = symbols.iter().find(|&&s| s >= code.n) {
            return Err(Error::IndexOutOfRange {
                what: "symbol",
                index: s,
                max: code.n - 1,
            });
        }
        let inverse = code
            .symbol_matrix(symbols)
            .inverse(code.field)
            .map_err(|e| match e {
                AlgebraError::Singular { .. } => Error::Construction(format!(
                    "symbols {symbols:?} do not determine the message; the code is not MDS"
                )),
                other => other.into(),
            })?;
        Ok(Decoder {
            field: code.field,
            symbols: symbols.to_vec(),
            alpha: code.alpha,
            inverse,
        })
    }

    /// `data[i]` holds the subsymbols of `symbols[i]` as given to [`Decoder::new`].
    pub fn decode(&self, data: &[&[Gf]]) -> Result<Vec<Gf>> {
        if data.len() != self.symbols.len() {
            return Err(Error::WrongSymbolCount {
                expected: self.symbols.len(),
                found: data.len(),
            });
        }
        let mut y = Vec::with_capacity(self.alpha * data.len());
        for d in data {
            if d.len() != self.alpha {
                return Err(Error::LengthMismatch {
                    expected: self.alpha,
                    found: d.len(),
                });
            }
            y.extend_from_slice(d);
        }
        Ok(self.inverse.left_mul_vec(self.field, &y)?)
    }
}

/// Recovers the message from exactly `k` distinct `(symbol, subsymbols)` pairs.
pub fn decode(code: &VectorCode, available: &[(usize, Vec<Gf>)]) -> Result<Vec<Gf>> {
    let symbols: Vec<usize> = available.iter().map(|(s, _)| *s).collect();
    if available.len() != code.k {
        return Err(Error::WrongSymbolCount {
            expected: code.k,
            found: symbols.iter().unique().count(),
        });
    }
    let data: Vec<&[Gf]> = available.iter().map(|(_, d)| d.as_slice()).collect();
    Decoder::new(code, &symbols)?.decode(&data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "role")]
pub enum SymbolRole {
    /// Data symbol kept by final codeword `codeword` (1-based).
    Unchanged {
        codeword: usize,
    },
    Retired,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanEntry {
    /// 0-based position in the initial codeword.
    pub symbol: usize,
    #[serde(flatten)]
    pub role: SymbolRole,
    /// 1-based instances to transfer.
    pub instances: BTreeSet<usize>,
}

/// Which subsymbols of each initial symbol may be read during conversion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DownloadPlan {
    pub entries: Vec<PlanEntry>,
}

impl DownloadPlan {
    pub fn total(&self) -> usize {
        self.entries.iter().map(|e| e.instances.len()).sum()
    }

    pub fn allows(&self, symbol: usize, instance: usize) -> bool {
        self.entries
            .get(symbol)
            .is_some_and(|e| e.instances.contains(&instance))
    }
}

pub fn make_download_plan(params: &ConversionParams) -> DownloadPlan {
    let lr = params.lambda_f * params.r_f;
    let (data, retired): (BTreeSet<usize>, BTreeSet<usize>) = match params.case {
        ConversionCase::SplitDown => ((params.r_f + 1..=lr).collect(), (1..=lr).collect()),
        ConversionCase::SplitUp => (
            (params.r_i + 1..=params.alpha).collect(),
            (1..=params.alpha).collect(),
        ),
    };
    let mut entries = Vec::with_capacity(params.n_i);
    for s in 0..params.k_i {
        entries.push(PlanEntry {
            symbol: s,
            role: SymbolRole::Unchanged {
                codeword: s / params.k_f + 1,
            },
            instances: data.clone(),
        });
    }
    for s in params.k_i..params.n_i {
        entries.push(PlanEntry {
            symbol: s,
            role: SymbolRole::Retired,
            instances: retired.clone(),
        });
    }
    DownloadPlan { entries }
}

/// Measured and reference read/write bandwidth of one conversion, in subsymbols.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandwidthReport {
    pub downloaded_subsymbols: usize,
    pub written_subsymbols: usize,
    pub gamma_r: usize,
    pub gamma_w: usize,
    pub gamma: usize,
    #[serde(with = "serde_rational")]
    pub baseline_default: Rational,
    #[serde(with = "serde_rational")]
    pub baseline_access_optimal: Rational,
    #[serde(with = "serde_rational")]
    pub bound_loose: Rational,
    #[serde(with = "serde_rational::option")]
    pub bound_tight: Option<Rational>,
}

impl BandwidthReport {
    fn new(params: &ConversionParams, downloaded: usize, written: usize) -> Self {
        let b = BoundInputs::from_params(params);
        let alpha = Rational::from_integer(params.alpha as i64);
        BandwidthReport {
            downloaded_subsymbols: downloaded,
            written_subsymbols: written,
            gamma_r: downloaded,
            gamma_w: written,
            gamma: downloaded + written,
            baseline_default: bounds::gamma_read_default(&b) * alpha,
            baseline_access_optimal: bounds::gamma_read_access_optimal(&b) * alpha,
            bound_loose: bounds::bound_loose(&b) * alpha,
            bound_tight: bounds::bound_tight(&b).ok().map(|t| t * alpha),
        }
    }
}

// Subsymbols copied out of the initial codeword according to the plan.
// Reading anything else is a plan violation.
struct Downloads {
    data: HashMap<(usize, usize), Gf>,
    read: HashSet<(usize, usize)>,
}

impl Downloads {
    fn fetch(initial: &Codeword, plan: &DownloadPlan) -> Self {
        let mut data = HashMap::with_capacity(plan.total());
        for e in &plan.entries {
            for &l in &e.instances {
                data.insert((e.symbol, l), initial.symbols[e.symbol][l - 1]);
            }
        }
        Downloads {
            data,
            read: HashSet::new(),
        }
    }

    fn get(&mut self, symbol: usize, instance: usize) -> Result<Gf> {
        let v = *self
            .data
            .get(&(symbol, instance))
            .ok_or(Error::PlanViolation { symbol, instance })?;
        self.read.insert((symbol, instance));
        Ok(v)
    }
}

struct Converter<'a> {
    field: &'static Field,
    params: &'a ConversionParams,
    points: &'a EvaluationPoints,
    store: Downloads,
}

impl Converter<'_> {
    fn pow(&self, t: usize, e: usize) -> Result<Gf> {
        Ok(self.field.pow(self.points.point(t)?, e as i64)?)
    }

    // enc_t of codeword i's data at instance l: sum_j xi_t^(j-1) D_{i,j}(l).
    fn enc(&mut self, t: usize, i: usize, l: usize) -> Result<Gf> {
        let mut acc = Gf::ZERO;
        for j in 1..=self.params.k_f {
            let d = self.store.get((i - 1) * self.params.k_f + j - 1, l)?;
            acc += self.field.mul(self.pow(t, j - 1)?, d);
        }
        Ok(acc)
    }

    // p^{(i)}_{t,l} . m, from downloaded data.
    fn projection(&mut self, i: usize, t: usize, l: usize) -> Result<Gf> {
        let w = self.pow(t, (i - 1) * self.params.k_f)?;
        let e = self.enc(t, i, l)?;
        Ok(self.field.mul(w, e))
    }

    fn retired(&mut self, t: usize, l: usize) -> Result<Gf> {
        self.store.get(self.params.k_i + t - 1, l)
    }

    // Initial parity t at logical instance (i-1) rF + l2, minus every
    // codeword's base-code contribution except those in `keep`.
    fn strip(&mut self, t: usize, i: usize, l2: usize, keep: Option<usize>) -> Result<Gf> {
        let lp = (i - 1) * self.params.r_f + l2;
        let mut v = self.retired(t, lp)?;
        for other in 1..=self.params.lambda_f {
            if Some(other) == keep {
                continue;
            }
            let li = crate::convertible::permuted_instance(lp, other, self.params)?;
            v -= self.projection(other, t, li)?;
        }
        Ok(v)
    }

    // Final parities of codeword i: parity[t-1][l-1].
    fn final_parities(&mut self, i: usize) -> Result<Vec<Vec<Gf>>> {
        let p = self.params;
        let (r_f, r_i, alpha, lr) = (p.r_f, p.r_i, p.alpha, p.lambda_f * p.r_f);
        let mut out = vec![vec![Gf::ZERO; alpha]; r_f];
        match p.case {
            ConversionCase::SplitDown => {
                for t in 1..=r_f {
                    let s = scaling_factor(self.field, t, i, p, self.points)?;
                    for l2 in 1..=r_f {
                        let v = self.strip(t, i, l2, Some(i))?;
                        out[t - 1][l2 - 1] = self.field.mul(s, v);
                    }
                }
                for big_t in r_f + 1..=r_i {
                    let s = scaling_factor(self.field, big_t, i, p, self.points)?;
                    for l2 in 1..=r_f {
                        let v = self.strip(big_t, i, l2, Some(i))?;
                        out[l2 - 1][lr + big_t - r_f - 1] = self.field.mul(s, v);
                    }
                }
                for t in 1..=r_f {
                    for l in r_f + 1..=lr {
                        out[t - 1][l - 1] = self.enc(t, i, l)?;
                    }
                }
            }
            ConversionCase::SplitUp => {
                for t in 1..=r_i {
                    let s = scaling_factor(self.field, t, i, p, self.points)?;
                    for l2 in 1..=r_i {
                        let v = self.strip(t, i, l2, Some(i))?;
                        out[t - 1][l2 - 1] = self.field.mul(s, v);
                    }
                    for l2 in r_i + 1..=r_f {
                        let s2 = scaling_factor(self.field, l2, i, p, self.points)?;
                        let v = self.strip(t, i, l2, None)?;
                        out[l2 - 1][t - 1] = self.field.mul(s2, v);
                    }
                }
                for t in 1..=r_f {
                    for l in r_i + 1..=alpha {
                        out[t - 1][l - 1] = self.enc(t, i, l)?;
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Splits `initial` into `lambda` final codewords, reading only what
/// [`make_download_plan`] allows. Data symbols move into the outputs
/// without copying.
pub fn convert(
    field: &'static Field,
    initial: Codeword,
    params: &ConversionParams,
    points: &EvaluationPoints,
) -> Result<(Vec<Codeword>, BandwidthReport)> {
    initial.check_shape(params.n_i, params.alpha)?;
    if points.len() < params.max_r() {
        return Err(Error::InvalidPoints(format!(
            "need {} evaluation points, got {}",
            params.max_r(),
            points.len()
        )));
    }
    let plan = make_download_plan(params);
    let mut conv = Converter {
        field,
        params,
        points,
        store: Downloads::fetch(&initial, &plan),
    };
    let mut parities = Vec::with_capacity(params.lambda_f);
    for i in 1..=params.lambda_f {
        parities.push(conv.final_parities(i)?);
    }
    let downloaded = conv.store.read.len();

    let mut data = initial.symbols.into_iter();
    let mut finals = Vec::with_capacity(params.lambda_f);
    let mut written = 0;
    for p in parities {
        let mut symbols: Vec<Vec<Gf>> = data.by_ref().take(params.k_f).collect();
        written += p.iter().map(Vec::len).sum::<usize>();
        symbols.extend(p);
        finals.push(Codeword { symbols });
    }
    Ok((finals, BandwidthReport::new(params, downloaded, written)))
}

/// Reads every data subsymbol and re-encodes each final codeword.
pub fn convert_default(
    initial: Codeword,
    params: &ConversionParams,
    final_code: &VectorCode,
) -> Result<(Vec<Codeword>, BandwidthReport)> {
    initial.check_shape(params.n_i, params.alpha)?;
    let span = params.k_f * params.alpha;
    let mut finals = Vec::with_capacity(params.lambda_f);
    let mut written = 0;
    for i in 0..params.lambda_f {
        let message: Vec<Gf> = initial.symbols[i * params.k_f..(i + 1) * params.k_f].concat();
        debug_assert_eq!(message.len(), span);
        let cw = encode(final_code, &message)?;
        written += (cw.n() - params.k_f) * params.alpha;
        finals.push(cw);
    }
    let downloaded = params.k_i * params.alpha;
    Ok((finals, BandwidthReport::new(params, downloaded, written)))
}

/// Message slice held by final codeword `i` (1-based).
pub fn message_slice<'a>(message: &'a [Gf], params: &ConversionParams, i: usize) -> &'a [Gf] {
    let span = params.k_f * params.alpha;
    &message[(i - 1) * span..i * span]
}

const MAGIC: &[u8; 4] = b"CVTC";
const VERSION: u8 = 0x01;
const HEADER_LEN: usize = 13;

/// A codeword together with the header fields of its file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodewordFile {
    pub poly: u16,
    pub k: usize,
    pub codeword: Codeword,
}

fn be16(v: usize, what: &str) -> Result<[u8; 2]> {
    u16::try_from(v)
        .map(u16::to_be_bytes)
        .map_err(|_| Error::Format(format!("{what} = {v} does not fit in 16 bits")))
}

impl CodewordFile {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let (n, alpha) = (self.codeword.n(), self.codeword.alpha());
        self.codeword.check_shape(n, alpha)?;
        let mut out = Vec::with_capacity(HEADER_LEN + n * alpha);
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.extend_from_slice(&self.poly.to_be_bytes());
        out.extend_from_slice(&be16(n, "n")?);
        out.extend_from_slice(&be16(self.k, "k")?);
        out.extend_from_slice(&be16(alpha, "alpha")?);
        for s in &self.codeword.symbols {
            out.extend(s.iter().map(|g| g.0));
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format(format!(
                "file has {} bytes, header needs {HEADER_LEN}",
                bytes.len()
            )));
        }
        if &bytes[..4] != MAGIC {
            return Err(Error::Format("bad magic, expected CVTC".into()));
        }
        if bytes[4] != VERSION {
            return Err(Error::Format(format!(
                "unsupported version {:#04x}",
                bytes[4]
            )));
        }
        let word = |at: usize| u16::from_be_bytes([bytes[at], bytes[at + 1]]);
        let poly = word(5);
        let (n, k, alpha) = (word(7) as usize, word(9) as usize, word(11) as usize);
        if k > n || alpha == 0 {
            return Err(Error::Format(format!(
                "bad dimensions n={n} k={k} alpha={alpha}"
            )));
        }
        let body = &bytes[HEADER_LEN..];
        if body.len() != n * alpha {
            return Err(Error::Format(format!(
                "expected {} subsymbol bytes, found {}",
                n * alpha,
                body.len()
            )));
        }
        let symbols = body
            .chunks(alpha)
            .map(|c| c.iter().map(|&b| Gf(b)).collect())
            .collect();
        Ok(CodewordFile {
            poly,
            k,
            codeword: Codeword { symbols },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convertible::Construction;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn build(ni: usize, ki: usize, nf: usize, kf: usize) -> Construction {
        let p = ConversionParams::derive(ni, ki, nf, kf).unwrap();
        Construction::new(Field::default_field(), p).unwrap()
    }

    fn random_message(rng: &mut ChaCha8Rng, len: usize) -> Vec<Gf> {
        (0..len).map(|_| Gf(rng.gen())).collect()
    }

    #[test]
    fn zero_message_encodes_to_zero() {
        let c = build(11, 8, 6, 4);
        let cw = encode(&c.initial, &[Gf::ZERO; 40]).unwrap();
        assert!(cw.symbols.iter().flatten().all(|g| g.is_zero()));
        assert!(encode(&c.initial, &[Gf::ONE; 39]).is_err());
    }

    #[test]
    fn systematic_symbols_hold_the_message() {
        let c = build(9, 8, 6, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = random_message(&mut rng, 32);
        let cw = encode(&c.initial, &m).unwrap();
        for s in 0..8 {
            assert_eq!(cw.symbol(s), &m[s * 4..s * 4 + 4]);
        }
    }

    #[test]
    fn plan_examples() {
        let c = build(11, 8, 6, 4);
        let plan = make_download_plan(&c.params);
        assert_eq!(plan.entries[8].instances, BTreeSet::from([1, 2, 3, 4]));
        assert_eq!(plan.entries[0].instances.len(), 2);
        assert_eq!(plan.entries[5].role, SymbolRole::Unchanged { codeword: 2 });
        assert_eq!(plan.total(), 28);

        let c = build(9, 8, 6, 4);
        let plan = make_download_plan(&c.params);
        assert_eq!(plan.entries[8].instances, BTreeSet::from([1, 2, 3, 4]));
        assert_eq!(plan.entries[3].instances.len(), 3);
        assert!(!plan.allows(0, 1));
        assert!(plan.allows(0, 2));
    }

    #[test]
    fn reference_conversions() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for ((ni, ki, nf, kf), gamma_r, default) in
            [((11, 8, 6, 4), 28, 40), ((9, 8, 6, 4), 28, 32)]
        {
            let c = build(ni, ki, nf, kf);
            let m = random_message(&mut rng, c.params.alpha * ki);
            let cw = encode(&c.initial, &m).unwrap();
            let (finals, report) = convert(c.field, cw.clone(), &c.params, &c.points).unwrap();
            assert_eq!(report.gamma_r, gamma_r);
            assert_eq!(report.gamma_w, c.params.gamma_write());
            assert_eq!(report.gamma, report.gamma_r + report.gamma_w);
            assert_eq!(report.baseline_default, Rational::from_integer(default));
            for (i, f) in finals.iter().enumerate() {
                let direct = encode(&c.final_code, message_slice(&m, &c.params, i + 1)).unwrap();
                assert_eq!(f, &direct);
            }
            let (dfl, dreport) = convert_default(cw, &c.params, &c.final_code).unwrap();
            assert_eq!(dfl, finals);
            assert_eq!(dreport.gamma_r as i64, default);
        }
    }

    #[test]
    fn report_is_data_independent() {
        let c = build(11, 8, 6, 4);
        let zero = encode(&c.initial, &[Gf::ZERO; 40]).unwrap();
        let (finals, r0) = convert(c.field, zero, &c.params, &c.points).unwrap();
        assert!(finals
            .iter()
            .flat_map(|f| f.symbols.iter().flatten())
            .all(|g| g.is_zero()));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cw = encode(&c.initial, &random_message(&mut rng, 40)).unwrap();
        let (_, r1) = convert(c.field, cw, &c.params, &c.points).unwrap();
        assert_eq!(r0, r1);
        assert_eq!(r0.written_subsymbols, 20);
        assert_eq!(r0.bound_tight, Some(Rational::from_integer(28)));
    }

    #[test]
    fn data_symbols_move_without_copying() {
        let c = build(11, 8, 6, 4);
        let cw = encode(&c.initial, &[Gf(9); 40]).unwrap();
        let ptrs: Vec<*const Gf> = cw.symbols[..8].iter().map(|s| s.as_ptr()).collect();
        let (finals, _) = convert(c.field, cw, &c.params, &c.points).unwrap();
        for (i, f) in finals.iter().enumerate() {
            for j in 0..4 {
                assert_eq!(f.symbols[j].as_ptr(), ptrs[i * 4 + j]);
            }
        }
    }

    #[test]
    fn store_rejects_unplanned_reads() {
        let c = build(11, 8, 6, 4);
        let cw = encode(&c.initial, &[Gf(1); 40]).unwrap();
        let plan = make_download_plan(&c.params);
        let mut store = Downloads::fetch(&cw, &plan);
        assert_eq!(
            store.get(0, 1),
            Err(Error::PlanViolation {
                symbol: 0,
                instance: 1
            })
        );
        assert_eq!(
            store.get(8, 5),
            Err(Error::PlanViolation {
                symbol: 8,
                instance: 5
            })
        );
        assert!(store.get(0, 3).is_ok());
        assert_eq!(store.read.len(), 1);
    }

    #[test]
    fn decode_examples() {
        let c = build(9, 8, 6, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random_message(&mut rng, 16);
        let cw = encode(&c.final_code, &m).unwrap();
        let data: Vec<(usize, Vec<Gf>)> = (0..4).map(|s| (s, cw.symbols[s].clone())).collect();
        assert_eq!(decode(&c.final_code, &data).unwrap(), m);
        for subset in (0..6).combinations(4) {
            let avail: Vec<(usize, Vec<Gf>)> =
                subset.iter().map(|&s| (s, cw.symbols[s].clone())).collect();
            assert_eq!(decode(&c.final_code, &avail).unwrap(), m);
        }
        let three: Vec<(usize, Vec<Gf>)> = (0..3).map(|s| (s, cw.symbols[s].clone())).collect();
        assert!(matches!(
            decode(&c.final_code, &three),
            Err(Error::WrongSymbolCount {
                expected: 4,
                found: 3
            })
        ));
        let dup = vec![
            data[0].clone(),
            data[0].clone(),
            data[1].clone(),
            data[2].clone(),
        ];
        assert!(matches!(
            decode(&c.final_code, &dup),
            Err(Error::WrongSymbolCount { .. })
        ));
    }

    #[test]
    fn file_round_trip_and_errors() {
        let c = build(9, 8, 6, 4);
        let cw = encode(&c.initial, &[Gf(5); 32]).unwrap();
        let file = CodewordFile {
            poly: 0x11D,
            k: 8,
            codeword: cw,
        };
        let bytes = file.to_bytes().unwrap();
        assert_eq!(
            &bytes[..13],
            &[b'C', b'V', b'T', b'C', 1, 0x01, 0x1D, 0, 9, 0, 8, 0, 4]
        );
        assert_eq!(bytes.len(), 13 + 36);
        assert_eq!(CodewordFile::from_bytes(&bytes).unwrap(), file);
        assert!(matches!(
            CodewordFile::from_bytes(&bytes[..40]),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            CodewordFile::from_bytes(&bytes[..5]),
            Err(Error::Format(_))
        ));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(CodewordFile::from_bytes(&bad).is_err());
        let mut bad = bytes;
        bad[4] = 2;
        assert!(CodewordFile::from_bytes(&bad).is_err());
    }

    #[test]
    fn report_json_fields() {
        let c = build(9, 8, 6, 4);
        let cw = encode(&c.initial, &[Gf(1); 32]).unwrap();
        let (_, r) = convert(c.field, cw, &c.params, &c.points).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["gamma_r"], 28);
        assert_eq!(v["bound_loose"], 28);
        assert_eq!(v["bound_tight"], serde_json::Value::Null);
        assert_eq!(v["baseline_access_optimal"], 32);
        let back: BandwidthReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn random_rows_decode_from_any_symbols() {
        let c = build(11, 8, 6, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let m = random_message(&mut rng, 40);
        let cw = encode(&c.initial, &m).unwrap();
        for _ in 0..20 {
            let mut subset: Vec<usize> = (0..11).collect();
            for idx in (1..subset.len()).rev() {
                subset.swap(idx, rng.gen_range(0..=idx));
            }
            subset.truncate(8);
            let avail: Vec<(usize, Vec<Gf>)> =
                subset.iter().map(|&s| (s, cw.symbols[s].clone())).collect();
            assert_eq!(decode(&c.initial, &avail).unwrap(), m);
        }
    }
}
