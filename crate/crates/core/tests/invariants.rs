mod common;

use std::sync::OnceLock;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rug::{Complex, Float, Integer};

use common::*;
use diffkr::flatmodel::{build_lattice, reduce_mod_lattice, unit_log};
use diffkr::linalg::CMatrix;
use diffkr::modtors::{zhat, zhat_form, zhat_form_float, TorsionPresentation};
use diffkr::numfield::cyclotomic_poly;
use diffkr::polylog::polylog_circle;
use diffkr::rtorsion::MetrizedComplexAtPlace;
use diffkr::{mp, FormElement, KContext, NumberField, Precision};

const DIGITS: u32 = 30;

fn zsqrt2() -> &'static NumberField {
    static F: OnceLock<NumberField> = OnceLock::new();
    F.get_or_init(|| NumberField::build(&[Integer::from(-2), Integer::from(0), Integer::from(1)], DIGITS).unwrap())
}

fn cyclo5() -> &'static NumberField {
    static F: OnceLock<NumberField> = OnceLock::new();
    F.get_or_init(|| NumberField::build(&cyclotomic_poly(5), DIGITS).unwrap())
}

fn ctx_zsqrt2() -> KContext {
    let f = zsqrt2();
    KContext::new(build_lattice(f, &[f.from_int(-1), f.element_from_ints(&[1, 1])]).unwrap(), vec![])
}

fn ctx_cyclo5() -> KContext {
    let f = cyclo5();
    KContext::new(build_lattice(f, &[f.element_from_ints(&[1, 1])]).unwrap(), vec![])
}

fn floats(v: &[f64], prec: Precision) -> Vec<Float> {
    v.iter().map(|&x| Float::with_val(prec.bits(), x)).collect()
}

fn small_elem() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-6i64..=6, 2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn quotient_ignores_all_ones(c in prop::collection::vec(-5.0f64..5.0, 2), shift in -5.0f64..5.0) {
        let prec = Precision::new(DIGITS);
        let f = FormElement::new(0, floats(&c, prec));
        let g = FormElement::new(0, floats(&[c[0] + shift, c[1] + shift], prec));
        let tol = Float::with_val(prec.bits(), 1e-12);
        for (a, b) in f.quotient_coords().iter().zip(g.quotient_coords()) {
            prop_assert!(mp::close(a, &b, &tol));
        }
    }

    #[test]
    fn reduction_is_lattice_invariant(x in -3.0f64..3.0, k in -4i64..=4) {
        let ctx = ctx_zsqrt2();
        let prec = ctx.precision();
        let bits = prec.bits();
        let f0 = zsqrt2();
        let gen = unit_log(f0, &f0.element_from_ints(&[1, 1])).unwrap();
        let f = FormElement::new(0, floats(&[0.0, x], prec));
        let shifted = f.add(&gen.scale(&Float::with_val(bits, k))).unwrap();
        let (t1, _) = reduce_mod_lattice(&ctx.lattice, &f).unwrap();
        let (t2, _) = reduce_mod_lattice(&ctx.lattice, &shifted).unwrap();
        let tol = prec.half_tol();
        for (a, b) in t1.coords().iter().zip(t2.coords()) {
            prop_assert!(mp::close(a, b, &tol));
        }
    }

    #[test]
    fn cycl_free_is_additive(seed in any::<u64>(), n in 1usize..=3, m in 1usize..=3) {
        let ctx = ctx_cyclo5();
        let prec = ctx.precision();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g: Vec<CMatrix> = (0..2).map(|_| rand_hpd(&mut rng, n, prec)).collect();
        let h: Vec<CMatrix> = (0..2).map(|_| rand_hpd(&mut rng, m, prec)).collect();
        let sum: Vec<CMatrix> = g.iter().zip(&h).map(|(a, b)| block_diag(a, b, prec)).collect();
        let lhs = ctx.cycl_free(&sum).unwrap();
        let rhs = ctx.class_add(&ctx.cycl_free(&g).unwrap(), &ctx.cycl_free(&h).unwrap()).unwrap();
        prop_assert!(ctx.class_eq(&lhs, &rhs));
        prop_assert_eq!(lhs.rank, Integer::from(n + m));
    }

    #[test]
    fn det_reduction(seed in any::<u64>(), n in 1usize..=4) {
        let ctx = ctx_cyclo5();
        let prec = ctx.precision();
        let bits = prec.bits();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g: Vec<CMatrix> = (0..2).map(|_| rand_hpd(&mut rng, n, prec)).collect();
        let dets: Vec<CMatrix> =
            g.iter().map(|m| CMatrix::diag(&[Float::with_val(bits, m.det().unwrap().real())], prec)).collect();
        let n_one = ctx.make(Integer::from(n), &[], &FormElement::zero(0, 2, prec)).unwrap();
        let lhs = ctx.class_sub(&ctx.cycl_free(&g).unwrap(), &n_one).unwrap();
        let rhs = ctx.class_sub(&ctx.cycl_free(&dets).unwrap(), &ctx.one()).unwrap();
        prop_assert!(ctx.class_eq(&lhs, &rhs));
    }

    #[test]
    fn unit_log_is_a_homomorphism(a in -3i64..=3, b in -3i64..=3) {
        let f = zsqrt2();
        let u = f.element_from_ints(&[1, 1]);
        let v = f.pow(&u, a).unwrap();
        let w = f.mul(&f.pow(&u, b).unwrap(), &f.from_int(-1));
        let prec = f.precision();
        let lhs = unit_log(f, &f.mul(&v, &w)).unwrap();
        let rhs = unit_log(f, &v).unwrap().add(&unit_log(f, &w).unwrap()).unwrap();
        let tol = prec.half_tol();
        for (x, y) in lhs.quotient_coords().iter().zip(rhs.quotient_coords()) {
            prop_assert!(mp::close(x, &y, &tol));
        }
    }

    #[test]
    fn zhat_is_block_additive(a in small_elem(), b in small_elem()) {
        let f = zsqrt2();
        let (ea, eb) = (f.element_from_ints(&a), f.element_from_ints(&b));
        prop_assume!(f.norm(&ea) != 0 && f.norm(&eb) != 0);
        let ctx = ctx_zsqrt2();
        let pa = TorsionPresentation::diagonal(f, &[ea]).unwrap();
        let pb = TorsionPresentation::diagonal(f, &[eb]).unwrap();
        let sum = pa.block_sum(f, &pb).unwrap();
        let lhs = zhat(&ctx, f, &sum).unwrap();
        let rhs = ctx.class_add(&zhat(&ctx, f, &pa).unwrap(), &zhat(&ctx, f, &pb).unwrap()).unwrap();
        prop_assert!(ctx.class_eq(&lhs, &rhs));
    }

    #[test]
    fn zhat_two_ways(entries in prop::collection::vec(-4i64..=4, 8)) {
        let f = zsqrt2();
        let m: Vec<Vec<_>> = (0..2)
            .map(|r| (0..2).map(|c| f.element_from_ints(&entries[4 * r + 2 * c..4 * r + 2 * c + 2])).collect())
            .collect();
        let Ok(pres) = TorsionPresentation::new(f, m) else { return Ok(()); };
        let exact = zhat_form(f, &pres);
        let float = zhat_form_float(f, &pres).unwrap();
        let tol = f.precision().half_tol();
        for (x, y) in exact.coeffs().iter().zip(float.coeffs()) {
            prop_assert!(mp::close(x, y, &tol));
        }
    }

    #[test]
    fn reidemeister_multiplicative_and_unitary_invariant(seed in any::<u64>()) {
        let prec = Precision::new(DIGITS);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_acyclic(&mut rng, prec);
        let b = random_acyclic(&mut rng, prec);
        let ta = a.log_reidemeister().unwrap();
        let tb = b.log_reidemeister().unwrap();
        let sum = direct_sum(&a, &b, prec);
        let ts = sum.log_reidemeister().unwrap();
        let tol = prec.half_tol();
        prop_assert!(mp::close(&ts, &Float::with_val(prec.bits(), &ta + &tb), &tol));
        // a simultaneous unitary change of basis, Grams transported
        let n = a.dims()[0];
        let u = unitary(&mut rng, n, prec);
        let d = u.adjoint().mul(&a.differentials()[0]).unwrap().mul(&u).unwrap();
        let g0 = u.adjoint().mul(&a.grams()[0]).unwrap().mul(&u).unwrap();
        let g1 = u.adjoint().mul(&a.grams()[1]).unwrap().mul(&u).unwrap();
        let moved = MetrizedComplexAtPlace::new(
            vec![n, n],
            vec![d],
            vec![g0, g1],
            vec![CMatrix::identity(0, prec); 2],
            vec![CMatrix::zeros(n, 0, prec); 2],
            prec,
        ).unwrap();
        prop_assert!(mp::close(&moved.log_reidemeister().unwrap(), &ta, &tol));
    }

    #[test]
    fn polylog_conjugation(n in 1u32..=6, t in 0.2f64..6.0) {
        let prec = Precision::new(DIGITS);
        let theta = Float::with_val(prec.bits(), t);
        let z = polylog_circle(n, &theta, prec).unwrap();
        let w = polylog_circle(n, &(prec.two_pi() - &theta), prec).unwrap();
        prop_assert!(mp::cdist(&z, &Complex::with_val(prec.bits(), w.conj_ref())) < prec.residual_tol());
    }

    #[test]
    fn polylog_reflection(n in 2u32..=6, t in 0.2f64..6.0) {
        let prec = Precision::new(DIGITS);
        let bits = prec.bits();
        let theta = Float::with_val(bits, t);
        let z = polylog_circle(n, &theta, prec).unwrap();
        let w = polylog_circle(n, &(prec.two_pi() - &theta), prec).unwrap();
        let lhs = if n % 2 == 0 { Complex::with_val(bits, &z + &w) } else { Complex::with_val(bits, &z - &w) };
        let x = Float::with_val(bits, &theta / prec.two_pi());
        let mag = Float::with_val(bits, rug::ops::Pow::pow(prec.two_pi(), n)) * bernoulli_poly_table(n as usize, &x)
            / prec.integer(&mp::factorial(n));
        let rhs = match n % 4 {
            0 => prec.complex(&-mag, &prec.zero()),
            1 => prec.complex(&prec.zero(), &-mag),
            2 => prec.complex(&mag, &prec.zero()),
            _ => prec.complex(&prec.zero(), &mag),
        };
        prop_assert!(mp::cdist(&lhs, &rhs) < prec.residual_tol());
    }
}

fn block_diag(a: &CMatrix, b: &CMatrix, prec: Precision) -> CMatrix {
    let (n, m) = (a.rows(), b.rows());
    CMatrix::from_fn(n + m, n + m, prec, |r, c| {
        if r < n && c < n {
            a.column(c)[r].clone()
        } else if r >= n && c >= n {
            b.column(c - n)[r - n].clone()
        } else {
            prec.czero()
        }
    })
}

fn unitary(rng: &mut ChaCha8Rng, n: usize, prec: Precision) -> CMatrix {
    // eigenvectors of a random Hermitian matrix
    rand_hpd(rng, n, prec).hermitian_eigen().unwrap().1
}

fn random_acyclic(rng: &mut ChaCha8Rng, prec: Precision) -> MetrizedComplexAtPlace {
    let n = 2;
    let d = rand_hpd(rng, n, prec);
    let grams = vec![rand_hpd(rng, n, prec), rand_hpd(rng, n, prec)];
    MetrizedComplexAtPlace::new(
        vec![n, n],
        vec![d],
        grams,
        vec![CMatrix::identity(0, prec); 2],
        vec![CMatrix::zeros(n, 0, prec); 2],
        prec,
    )
    .unwrap()
}

fn direct_sum(a: &MetrizedComplexAtPlace, b: &MetrizedComplexAtPlace, prec: Precision) -> MetrizedComplexAtPlace {
    let dims: Vec<usize> = a.dims().iter().zip(b.dims()).map(|(x, y)| x + y).collect();
    let d = block_diag(&a.differentials()[0], &b.differentials()[0], prec);
    let grams = (0..2).map(|i| block_diag(&a.grams()[i], &b.grams()[i], prec)).collect();
    MetrizedComplexAtPlace::new(
        dims.clone(),
        vec![d],
        grams,
        vec![CMatrix::identity(0, prec); 2],
        dims.iter().map(|&k| CMatrix::zeros(k, 0, prec)).collect(),
        prec,
    )
    .unwrap()
}

#[test]
fn degree_shift_flips_sign() {
    let prec = Precision::new(DIGITS);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let a = random_acyclic(&mut rng, prec);
    let n = a.dims()[0];
    let zero = CMatrix::zeros(n, 0, prec);
    let shifted = MetrizedComplexAtPlace::new(
        vec![0, n, n],
        vec![zero, a.differentials()[0].clone()],
        vec![CMatrix::identity(0, prec), a.grams()[0].clone(), a.grams()[1].clone()],
        vec![CMatrix::identity(0, prec); 3],
        vec![CMatrix::zeros(0, 0, prec), CMatrix::zeros(n, 0, prec), CMatrix::zeros(n, 0, prec)],
        prec,
    )
    .unwrap();
    let sum = Float::with_val(prec.bits(), a.log_reidemeister().unwrap() + shifted.log_reidemeister().unwrap());
    assert!(sum.abs() < prec.half_tol());
}

#[test]
fn contraction_oracle_pins_the_convention() {
    // 0 → Q --2--> Q → 0 with standard metrics
    let qc = QComplex {
        dims: vec![1, 1],
        diffs: vec![vec![vec![rug::Rational::from(2)]]],
        coh_maps: vec![qzeros(1, 0), qzeros(1, 0)],
        coh_dims: vec![0, 0],
    };
    let tau2 = milnor_tau_squared(&qc, &[qidentity(1), qidentity(1)], &[qzeros(0, 0), qzeros(0, 0)]);
    assert_eq!(tau2, rug::Rational::from((1, 4)));
    let prec = Precision::new(DIGITS);
    let d = CMatrix::diag(&[prec.int(2)], prec);
    let c = MetrizedComplexAtPlace::acyclic_standard(vec![1, 1], vec![d], prec).unwrap();
    let tau = c.reidemeister().unwrap();
    assert!(mp::close(&tau, &Float::with_val(prec.bits(), 0.5), &prec.residual_tol()));
}

#[test]
fn zeta_oracle_self_check() {
    let prec = Precision::new(40);
    let z2 = zeta_borwein(2, prec.bits());
    let pi2 = Float::with_val(prec.bits(), prec.pi().square_ref()) / 6u32;
    assert!(mp::close(&z2, &pi2, &prec.residual_tol()));
}
