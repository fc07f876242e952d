//! Systematic scalar MDS codes with Vandermonde parity columns.
//!
//! Parity `t` of a `[k + r, k]` code is the column
//! `h_t = (1, xi_t, xi_t^2, ..., xi_t^(k-1))`. Because every `h_t` is a
//! geometric sequence, any length-`kF` window of it is a scalar multiple
//! of its first window, which is what lets one initial parity be split
//! into per-codeword final parities.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::algebra::{Field, Gf, Matrix};
use crate::error::{Error, Result};

/// Ordered evaluation points `xi_1..xi_r`.
///
/// [`EvaluationPoints::new`] enforces nonzero, pairwise-distinct points.
/// Deserialization does not, so that a corrupted points file can still be
/// loaded and then fail MDS verification; call [`EvaluationPoints::validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EvaluationPoints(Vec<Gf>);

impl EvaluationPoints {
    pub fn new(points: Vec<Gf>) -> Result<Self> {
        let p = EvaluationPoints(points);
        p.validate()?;
        Ok(p)
    }

    /// Skips validation. Only useful for exercising failure paths.
    pub fn new_unchecked(points: Vec<Gf>) -> Self {
        EvaluationPoints(points)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(pos) = self.0.iter().position(|p| p.is_zero()) {
            return Err(Error::InvalidPoints(format!("point {} is zero", pos + 1)));
        }
        for (a, b) in (0..self.0.len()).tuple_combinations() {
            if self.0[a] == self.0[b] {
                return Err(Error::InvalidPoints(format!(
                    "points {} and {} are both {}",
                    a + 1,
                    b + 1,
                    self.0[a]
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Gf] {
        &self.0
    }

    /// `xi_t`, 1-based.
    pub fn point(&self, t: usize) -> Result<Gf> {
        if t == 0 || t > self.0.len() {
            return Err(Error::IndexOutOfRange {
                what: "parity",
                index: t,
                max: self.0.len(),
            });
        }
        Ok(self.0[t - 1])
    }

    /// The first `r` points.
    pub fn prefix(&self, r: usize) -> EvaluationPoints {
        EvaluationPoints(self.0[..r.min(self.0.len())].to_vec())
    }
}

/// `[n, k]` systematic code with generator `[I | P]`.
#[derive(Debug, Clone)]
pub struct ScalarCode {
    pub n: usize,
    pub k: usize,
    pub generator: Matrix,
    pub field: &'static Field,
}

/// `h_t` of length `k`: entry `j` (1-based) is `xi_t^(j-1)`.
pub fn parity_vector(
    field: &Field,
    t_index: usize,
    k: usize,
    points: &EvaluationPoints,
) -> Result<Vec<Gf>> {
    let xi = points.point(t_index)?;
    (0..k)
        .map(|e| field.pow(xi, e as i64).map_err(Error::from))
        .collect()
}

pub fn build_systematic_code(
    field: &'static Field,
    n: usize,
    k: usize,
    points: &EvaluationPoints,
) -> Result<ScalarCode> {
    if k == 0 || n < k {
        return Err(Error::InvalidParams(format!(
            "need n >= k >= 1, got n={n} k={k}"
        )));
    }
    if points.len() != n - k {
        return Err(Error::InvalidParams(format!(
            "[{n}, {k}] code needs {} evaluation points, got {}",
            n - k,
            points.len()
        )));
    }
    let mut generator = Matrix::zeros(k, n);
    for i in 0..k {
        generator.set(i, i, Gf::ONE);
    }
    for t in 1..=n - k {
        for (j, v) in parity_vector(field, t, k, points)?.into_iter().enumerate() {
            generator.set(j, k + t - 1, v);
        }
    }
    Ok(ScalarCode {
        n,
        k,
        generator,
        field,
    })
}

/// True iff every k-subset of generator columns has rank k.
pub fn verify_mds_scalar(code: &ScalarCode) -> bool {
    (0..code.n)
        .combinations(code.k)
        .all(|cols| code.generator.select_columns(&cols).rank(code.field) == code.k)
}

// Checks only the k-subsets containing the last column; the caller has
// already certified every subset of the shorter prefix code.
fn extends_mds(code: &ScalarCode) -> bool {
    let last = code.n - 1;
    (0..last).combinations(code.k - 1).all(|mut cols| {
        cols.push(last);
        code.generator.select_columns(&cols).rank(code.field) == code.k
    })
}

/// Lexicographically first tuple of `max_r` distinct nonzero points for
/// which the `[k + max_r, k]` systematic Vandermonde code is MDS.
///
/// Every prefix of the result also yields an MDS code, so the same tuple
/// serves `[k + r', k]` for all `r' <= max_r`.
pub fn search_points(
    field: &'static Field,
    n: usize,
    k: usize,
    max_r: usize,
) -> Result<EvaluationPoints> {
    if n < k || max_r < n - k {
        return Err(Error::InvalidParams(format!(
            "search needs max_r >= n - k, got n={n} k={k} max_r={max_r}"
        )));
    }
    search_points_where(field, k, max_r, |_| true)
}

/// Like [`search_points`], but keeps scanning in the same order until
/// `accept` also approves the tuple.
pub fn search_points_where(
    field: &'static Field,
    k: usize,
    max_r: usize,
    mut accept: impl FnMut(&EvaluationPoints) -> bool,
) -> Result<EvaluationPoints> {
    if k == 0 {
        return Err(Error::InvalidParams("k must be positive".into()));
    }
    let mut prefix = Vec::with_capacity(max_r);
    if dfs(field, k, max_r, &mut prefix, &mut accept)? {
        Ok(EvaluationPoints(prefix))
    } else {
        Err(Error::SearchFailed {
            n: k + max_r,
            k,
            poly: field.poly(),
        })
    }
}

fn dfs(
    field: &'static Field,
    k: usize,
    max_r: usize,
    prefix: &mut Vec<Gf>,
    accept: &mut impl FnMut(&EvaluationPoints) -> bool,
) -> Result<bool> {
    if prefix.len() == max_r {
        return Ok(accept(&EvaluationPoints(prefix.clone())));
    }
    for v in 1..=255u8 {
        let candidate = Gf(v);
        if prefix.contains(&candidate) {
            continue;
        }
        prefix.push(candidate);
        let pts = EvaluationPoints(prefix.clone());
        let code = build_systematic_code(field, k + pts.len(), k, &pts)?;
        if extends_mds(&code) && dfs(field, k, max_r, prefix, accept)? {
            return Ok(true);
        }
        prefix.pop();
    }
    Ok(false)
}

/// Checks `h_t[1..kF] = xi_t^(-(i-1)kF) * h_t[(i-1)kF+1 ..= i*kF]` for every
/// point and every `i` in `1..=lambda`.
pub fn check_prefix_scaling(
    field: &Field,
    points: &EvaluationPoints,
    k_f: usize,
    lambda: usize,
) -> bool {
    (1..=points.len()).all(|t| {
        let Ok(h) = parity_vector(field, t, lambda * k_f, points) else {
            return false;
        };
        let xi = points.as_slice()[t - 1];
        (1..=lambda).all(|i| {
            let Ok(scale) = field.pow(xi, -(((i - 1) * k_f) as i64)) else {
                return false;
            };
            let window = &h[(i - 1) * k_f..i * k_f];
            h[..k_f]
                .iter()
                .zip(window)
                .all(|(&head, &w)| head == field.mul(scale, w))
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field() -> &'static Field {
        Field::default_field()
    }

    fn pts(v: &[u8]) -> EvaluationPoints {
        EvaluationPoints::new(v.iter().map(|&x| Gf(x)).collect()).unwrap()
    }

    #[test]
    fn points_validation() {
        assert!(EvaluationPoints::new(vec![Gf(1), Gf(0)]).is_err());
        assert!(EvaluationPoints::new(vec![Gf(3), Gf(3)]).is_err());
        assert!(EvaluationPoints::new(vec![Gf(3), Gf(4)]).is_ok());
        let json = serde_json::to_string(&pts(&[1, 2, 200])).unwrap();
        assert_eq!(json, "[1,2,200]");
        let back: EvaluationPoints = serde_json::from_str(&json).unwrap();
        assert_eq!(back, pts(&[1, 2, 200]));
    }

    #[test]
    fn parity_vector_examples() {
        let f = field();
        assert_eq!(parity_vector(f, 1, 5, &pts(&[1])).unwrap(), vec![Gf(1); 5]);
        assert_eq!(
            parity_vector(f, 2, 4, &pts(&[1, 2])).unwrap(),
            vec![Gf(1), Gf(2), Gf(4), Gf(8)]
        );
        for x in [3u8, 7, 0x8e] {
            assert_eq!(parity_vector(f, 1, 3, &pts(&[x])).unwrap()[0], Gf::ONE);
        }
        assert!(matches!(
            parity_vector(f, 3, 4, &pts(&[1, 2])),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(parity_vector(f, 0, 4, &pts(&[1, 2])).is_err());
    }

    #[test]
    fn systematic_code_shapes() {
        let f = field();
        let id = build_systematic_code(f, 4, 4, &pts(&[])).unwrap();
        assert_eq!(id.generator, Matrix::identity(4));
        assert!(verify_mds_scalar(&id));

        let c = build_systematic_code(f, 5, 4, &pts(&[1])).unwrap();
        assert_eq!(c.generator.column(4), vec![Gf::ONE; 4]);
        assert!(verify_mds_scalar(&c));

        assert!(build_systematic_code(f, 6, 4, &pts(&[1])).is_err());
        assert!(build_systematic_code(f, 3, 4, &pts(&[])).is_err());
    }

    #[test]
    fn duplicate_point_breaks_mds() {
        let dup = EvaluationPoints::new_unchecked(vec![Gf(2), Gf(2)]);
        let c = build_systematic_code(field(), 6, 4, &dup).unwrap();
        assert!(!verify_mds_scalar(&c));
    }

    #[test]
    fn search_examples() {
        let f = field();
        assert!(search_points(f, 4, 4, 0).unwrap().is_empty());
        assert_eq!(search_points(f, 5, 4, 1).unwrap(), pts(&[1]));

        let p = search_points(f, 11, 8, 3).unwrap();
        assert_eq!(p.len(), 3);
        let code = build_systematic_code(f, 11, 8, &p).unwrap();
        assert!(verify_mds_scalar(&code));

        assert!(search_points(f, 11, 8, 2).is_err());
    }

    #[test]
    fn search_is_lexicographically_first() {
        let f = field();
        for (k, r) in [(3, 2), (5, 2), (4, 3)] {
            let found = search_points(f, k + r, k, r).unwrap();
            // Plain nested scan over ordered tuples, full MDS check each time.
            let brute = (0..r)
                .map(|_| 1..=255u8)
                .multi_cartesian_product()
                .filter(|t| t.iter().all_unique())
                .find(|t| {
                    let p = EvaluationPoints::new_unchecked(t.iter().map(|&x| Gf(x)).collect());
                    verify_mds_scalar(&build_systematic_code(f, k + r, k, &p).unwrap())
                })
                .unwrap();
            assert_eq!(found, pts(&brute), "k={k} r={r}");
        }
    }

    #[test]
    fn mds_rank_check_agrees_with_erasure_decoding() {
        use rand::{Rng, SeedableRng};
        let f = field();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let cases = [
            (6, 4, search_points(f, 6, 4, 2).unwrap()),
            (
                7,
                4,
                EvaluationPoints::new_unchecked(vec![Gf(1), Gf(2), Gf(2)]),
            ),
            (7, 3, pts(&[1, 2, 3, 4])),
        ];
        for (n, k, p) in cases {
            let code = build_systematic_code(f, n, k, &p).unwrap();
            let mds = verify_mds_scalar(&code);
            let mut decodes_all = true;
            for keep in (0..n).combinations(k) {
                let sub = code.generator.select_columns(&keep);
                for _ in 0..5 {
                    let msg: Vec<Gf> = (0..k).map(|_| Gf(rng.gen())).collect();
                    let cw = code.generator.left_mul_vec(f, &msg).unwrap();
                    let received: Vec<Gf> = keep.iter().map(|&c| cw[c]).collect();
                    let rhs = Matrix::new(k, 1, received).unwrap();
                    match sub.transpose().solve(f, &rhs) {
                        Ok(x) => assert_eq!(x.column(0), msg),
                        Err(_) => decodes_all = false,
                    }
                }
            }
            assert_eq!(mds, decodes_all, "n={n} k={k} points={p:?}");
        }
    }

    #[test]
    fn mds_codes_decode_random_messages() {
        use rand::{Rng, SeedableRng};
        let f = field();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let p = search_points(f, 11, 8, 3).unwrap();
        let code = build_systematic_code(f, 11, 8, &p).unwrap();
        let subsets: Vec<Vec<usize>> = (0..11).combinations(8).collect();
        for _ in 0..100 {
            let msg: Vec<Gf> = (0..8).map(|_| Gf(rng.gen())).collect();
            let cw = code.generator.left_mul_vec(f, &msg).unwrap();
            let keep = &subsets[rng.gen_range(0..subsets.len())];
            let received: Vec<Gf> = keep.iter().map(|&c| cw[c]).collect();
            let sub = code.generator.select_columns(keep).transpose();
            let x = sub.solve(f, &Matrix::new(8, 1, received).unwrap()).unwrap();
            assert_eq!(x.column(0), msg);
        }
    }

    #[test]
    fn prefix_scaling_examples() {
        let f = field();
        assert!(check_prefix_scaling(f, &pts(&[2]), 2, 2));
        // (1, 2) = 2^-2 * (4, 8)
        let s = f.pow(Gf(2), -2).unwrap();
        assert_eq!(f.mul(s, Gf(4)), Gf(1));
        assert_eq!(f.mul(s, Gf(8)), Gf(2));
        for (k, r) in [(4, 3), (8, 3), (6, 4)] {
            let p = search_points(f, k + r, k, r).unwrap();
            for (kf, lambda) in [(1, k), (2, k / 2)] {
                assert!(check_prefix_scaling(f, &p, kf, lambda));
            }
        }
        for x in 1..=255u8 {
            assert!(check_prefix_scaling(f, &pts(&[x]), 3, 4));
        }
    }
}
