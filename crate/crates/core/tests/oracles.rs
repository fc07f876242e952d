//! Cross-checks against independent, formula-level computations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use splitconv::algebra::{mul_shift_reduce, Field, Gf, DEFAULT_POLY};
use splitconv::bounds::{optimal_betas, BetaAssignment, BoundInputs, Rational};
use splitconv::convertible::{Construction, ConversionParams};
use splitconv::engine::{convert, convert_default, encode, message_slice};
use splitconv::flow::{check_feasibility, lemma_cut_value};

// Arithmetic straight from the reducing polynomial, no tables.
fn mul(a: u8, b: u8) -> u8 {
    mul_shift_reduce(DEFAULT_POLY, a, b)
}

fn pow(a: u8, e: usize) -> u8 {
    (0..e).fold(1, |acc, _| mul(acc, a))
}

fn inv(a: u8) -> u8 {
    (1..=255u8).find(|&b| mul(a, b) == 1).unwrap()
}

struct Msg<'a> {
    m: &'a [u8],
    k_f: usize,
    alpha: usize,
}

impl Msg<'_> {
    // Codeword i, data symbol j, instance l, all 1-based.
    fn at(&self, i: usize, j: usize, l: usize) -> u8 {
        self.m[(i - 1) * self.k_f * self.alpha + (j - 1) * self.alpha + (l - 1)]
    }

    // sum_j xi^(offset + j - 1) m[i][j][l]
    fn row(&self, xi: u8, offset: usize, i: usize, l: usize) -> u8 {
        (1..=self.k_f).fold(0, |acc, j| {
            acc ^ mul(pow(xi, offset + j - 1), self.at(i, j, l))
        })
    }
}

fn random_bytes(seed: u64, len: usize) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.gen()).collect()
}

fn to_gf(v: &[u8]) -> Vec<Gf> {
    v.iter().map(|&b| Gf(b)).collect()
}

#[test]
fn initial_encoding_matches_formula_when_parities_decrease() {
    // (11, 8; 6, 4): lambda = 2, rF = 2, rI = 3, alpha = 5.
    let p = ConversionParams::derive(11, 8, 6, 4).unwrap();
    let c = Construction::new(Field::default_field(), p.clone()).unwrap();
    let xi: Vec<u8> = c.points.as_slice().iter().map(|g| g.0).collect();
    // Codeword 2's blocks are swapped: instances 1,2 <-> 3,4.
    let perm = |i: usize, l: usize| if i == 1 || l == 5 { l } else { (l + 1) % 4 + 1 };
    for seed in 0..10 {
        let raw = random_bytes(seed, 40);
        let msg = Msg {
            m: &raw,
            k_f: 4,
            alpha: 5,
        };
        let cw = encode(&c.initial, &to_gf(&raw)).unwrap();
        for t in 1..=3 {
            for l in 1..=5 {
                let mut want = 0;
                for i in 1..=2 {
                    want ^= msg.row(xi[t - 1], 4 * (i - 1), i, perm(i, l));
                }
                if t == 3 && l <= 4 {
                    let (b, off) = (l.div_ceil(2), (l - 1) % 2 + 1);
                    let coef = pow(mul(xi[2], inv(xi[off - 1])), 4 * (b - 1));
                    want ^= mul(coef, msg.row(xi[off - 1], 4 * (b - 1), b, 5));
                }
                assert_eq!(
                    cw.symbols[8 + t - 1][l - 1],
                    Gf(want),
                    "seed {seed} t {t} l {l}"
                );
            }
        }
    }
}

#[test]
fn initial_encoding_matches_formula_when_parities_increase() {
    // (9, 8; 6, 4): lambda = 2, rF = 2, rI = 1, alpha = 4.
    let p = ConversionParams::derive(9, 8, 6, 4).unwrap();
    let c = Construction::new(Field::default_field(), p.clone()).unwrap();
    let xi: Vec<u8> = c.points.as_slice().iter().map(|g| g.0).collect();
    let perm = |i: usize, l: usize| if i == 1 { l } else { (l + 1) % 4 + 1 };
    for seed in 0..10 {
        let raw = random_bytes(100 + seed, 32);
        let msg = Msg {
            m: &raw,
            k_f: 4,
            alpha: 4,
        };
        let cw = encode(&c.initial, &to_gf(&raw)).unwrap();
        for l in 1..=4 {
            let mut want = msg.row(xi[0], 0, 1, perm(1, l)) ^ msg.row(xi[0], 4, 2, perm(2, l));
            if l % 2 == 0 {
                let b = l / 2;
                want ^= msg.row(xi[1], 4 * (b - 1), b, 1);
            }
            assert_eq!(cw.symbols[8][l - 1], Gf(want), "seed {seed} l {l}");
        }
    }
}

#[test]
fn final_codewords_match_formula() {
    for (ni, tail) in [(11, true), (9, false)] {
        let p = ConversionParams::derive(ni, 8, 6, 4).unwrap();
        let c = Construction::new(Field::default_field(), p.clone()).unwrap();
        let xi: Vec<u8> = c.points.as_slice().iter().map(|g| g.0).collect();
        let raw = random_bytes(ni as u64, p.alpha * 8);
        let cw = encode(&c.initial, &to_gf(&raw)).unwrap();
        let (finals, _) = convert(c.field, cw, &p, &c.points).unwrap();
        for (i, f) in finals.iter().enumerate() {
            let slice: Vec<u8> = message_slice(&to_gf(&raw), &p, i + 1)
                .iter()
                .map(|g| g.0)
                .collect();
            let own = Msg {
                m: &slice,
                k_f: 4,
                alpha: p.alpha,
            };
            for t in 1..=2 {
                for l in 1..=p.alpha {
                    let mut want = own.row(xi[t - 1], 0, 1, l);
                    if tail && l == 5 {
                        want ^= own.row(xi[2], 0, 1, t);
                    }
                    assert_eq!(
                        f.symbols[4 + t - 1][l - 1],
                        Gf(want),
                        "ni {ni} i {} t {t} l {l}",
                        i + 1
                    );
                }
            }
        }
    }
}

#[test]
fn default_and_piggyback_conversions_agree() {
    let p = ConversionParams::derive(11, 8, 6, 4).unwrap();
    let c = Construction::new(Field::default_field(), p.clone()).unwrap();
    for seed in 0..100 {
        let cw = encode(&c.initial, &to_gf(&random_bytes(seed, 40))).unwrap();
        let (a, ra) = convert(c.field, cw.clone(), &p, &c.points).unwrap();
        let (b, rb) = convert_default(cw, &p, &c.final_code).unwrap();
        assert_eq!(a, b);
        assert_eq!((ra.gamma_r, rb.gamma_r), (28, 40));
        assert_eq!(ra.gamma_w, rb.gamma_w);
    }
}

fn bound_sweep() -> Vec<BoundInputs> {
    let mut out = Vec::new();
    for l in 2..=3 {
        for kf in 2..=5 {
            for rf in 1..kf {
                for ri in 1..=4 {
                    out.push(BoundInputs::new(l, kf, ri, rf).unwrap());
                }
            }
        }
    }
    out
}

#[test]
fn closed_form_betas_are_flow_feasible() {
    for b in bound_sweep() {
        for mode in [false, true] {
            let o = optimal_betas(&b, mode).unwrap();
            let rep = check_feasibility(&b, &o).unwrap();
            assert!(rep.feasible, "{b:?} mode {mode}: worst {}", rep.worst_flow);
        }
    }
}

#[test]
fn flow_oracle_is_never_looser_than_the_cut() {
    let grid = [0, 1, 2, 3, 4, 5, 6].map(|n| Rational::new(n, 6));
    for b in bound_sweep().into_iter().step_by(3) {
        for &b1 in &grid {
            for &b2 in &grid {
                let betas = BetaAssignment::new(b1, b2).unwrap();
                let rep = check_feasibility(&b, &betas).unwrap();
                if lemma_cut_value(&b, &betas) < rep.required_flow {
                    assert!(!rep.feasible, "{b:?} ({b1}, {b2})");
                }
                assert!(rep.worst_flow <= lemma_cut_value(&b, &betas));
            }
        }
    }
}
