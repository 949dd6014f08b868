//! Orders `R = Z[x]/(p)`: embeddings, places, exact norms and unit checks.

use std::cmp::Ordering;
use std::path::Path;

use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mp::{self, Precision};
use crate::poly::{resultant, QPoly};

const ABERTH_MAX_ITER: usize = 5000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlaceKind {
    Real,
    Complex,
}

/// A place representative in `Σ*`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Place {
    /// Index into [`NumberField::embeddings`].
    pub embedding: usize,
    pub kind: PlaceKind,
    /// Index of the conjugate embedding for complex places.
    pub conjugate: Option<usize>,
}

/// An element of `k = Q[x]/(p)` in the power basis `1, x, ..., x^(n-1)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldElement {
    coeffs: Vec<Rational>,
}

impl FieldElement {
    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn degree_bound(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0)
    }

    /// Every power-basis coordinate is an integer.
    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| *c.denom() == 1)
    }

    pub fn add(&self, other: &FieldElement) -> FieldElement {
        FieldElement {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| Rational::from(a + b)).collect(),
        }
    }

    pub fn sub(&self, other: &FieldElement) -> FieldElement {
        FieldElement {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| Rational::from(a - b)).collect(),
        }
    }

    pub fn neg(&self) -> FieldElement {
        FieldElement { coeffs: self.coeffs.iter().map(|a| Rational::from(-a)).collect() }
    }

    pub fn scale(&self, q: &Rational) -> FieldElement {
        FieldElement { coeffs: self.coeffs.iter().map(|a| Rational::from(a * q)).collect() }
    }

    fn as_poly(&self) -> QPoly {
        QPoly::new(self.coeffs.clone())
    }

    /// Coordinates as `"p/q"` strings.
    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(mp::fmt_rational).collect()
    }
}

#[derive(Clone, Debug)]
pub struct NumberField {
    defining_poly: Vec<Integer>,
    poly: QPoly,
    prec: Precision,
    embeddings: Vec<Complex>,
    places: Vec<Place>,
    r_real: usize,
    r_complex: usize,
}

fn cmp_float(a: &Float, b: &Float) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

impl NumberField {
    /// Isolates the roots of the monic squarefree `poly` (constant term first) at `digits`
    /// decimal digits and sorts them into places.
    pub fn build(poly: &[Integer], digits: u32) -> Result<NumberField> {
        let prec = Precision::new(digits);
        let mut defining_poly = poly.to_vec();
        while defining_poly.last().is_some_and(|c| *c == 0) {
            defining_poly.pop();
        }
        if defining_poly.len() < 2 || *defining_poly.last().unwrap() != 1 {
            return Err(Error::NotMonic);
        }
        let qpoly = QPoly::from_integers(&defining_poly);
        let g = qpoly.gcd(&qpoly.derivative());
        if g.degree() != Some(0) {
            return Err(Error::NotSquarefree);
        }
        let roots = aberth_ehrlich(&qpoly, prec)?;
        let tol = prec.residual_tol();
        for z in &roots {
            let r = Float::with_val(prec.bits(), qpoly.eval(z, prec).abs_ref());
            if r >= tol {
                return Err(Error::NoConvergence(format!(
                    "root residual {} above bound",
                    mp::fmt_float(&r, 6)
                )));
            }
        }

        let split = prec.half_tol();
        let mut reals = Vec::new();
        let mut upper = Vec::new();
        let mut lower = Vec::new();
        for z in roots {
            let im = Float::with_val(prec.bits(), z.imag());
            if Float::with_val(prec.bits(), im.abs_ref()) < split {
                reals.push(Float::with_val(prec.bits(), z.real()));
            } else if im > 0 {
                upper.push(z);
            } else {
                lower.push(z);
            }
        }
        if upper.len() != lower.len() {
            return Err(Error::NoConvergence("complex roots do not pair up".into()));
        }
        reals.sort_by(cmp_float);
        upper.sort_by(|a, b| {
            let (ar, br) = (Float::with_val(prec.bits(), a.real()), Float::with_val(prec.bits(), b.real()));
            cmp_float(&ar, &br).then_with(|| {
                let (ai, bi) = (Float::with_val(prec.bits(), a.imag()), Float::with_val(prec.bits(), b.imag()));
                cmp_float(&ai, &bi)
            })
        });
        // pair each representative with its nearest lower-half-plane root
        let mut conj = Vec::with_capacity(upper.len());
        let mut pool = lower;
        for z in &upper {
            let target = z.clone().conj();
            let (best, _) = pool
                .iter()
                .enumerate()
                .map(|(i, w)| (i, mp::cdist(w, &target)))
                .min_by(|a, b| cmp_float(&a.1, &b.1))
                .ok_or_else(|| Error::NoConvergence("missing conjugate root".into()))?;
            let w = pool.swap_remove(best);
            if mp::cdist(&w, &target) > split {
                return Err(Error::NoConvergence("complex roots do not pair up".into()));
            }
            // keep the exact conjugate of the representative
            conj.push(target);
        }

        let r_real = reals.len();
        let r_complex = upper.len();
        let mut embeddings: Vec<Complex> = reals.iter().map(|x| prec.creal(x)).collect();
        embeddings.extend(upper);
        embeddings.extend(conj);
        let mut places: Vec<Place> =
            (0..r_real).map(|i| Place { embedding: i, kind: PlaceKind::Real, conjugate: None }).collect();
        places.extend((0..r_complex).map(|i| Place {
            embedding: r_real + i,
            kind: PlaceKind::Complex,
            conjugate: Some(r_real + r_complex + i),
        }));
        Ok(NumberField { defining_poly, poly: qpoly, prec, embeddings, places, r_real, r_complex })
    }

    pub fn degree(&self) -> usize {
        self.defining_poly.len() - 1
    }

    pub fn defining_poly(&self) -> &[Integer] {
        &self.defining_poly
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn digits(&self) -> u32 {
        self.prec.digits()
    }

    /// All `n` complex embeddings of the generator: real ones, then the place
    /// representatives, then their conjugates.
    pub fn embeddings(&self) -> &[Complex] {
        &self.embeddings
    }

    /// Ordered place representatives `Σ*`.
    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn num_places(&self) -> usize {
        self.places.len()
    }

    pub fn r_real(&self) -> usize {
        self.r_real
    }

    pub fn r_complex(&self) -> usize {
        self.r_complex
    }

    /// Rank of the unit group, `r_R + r_C - 1`.
    pub fn dirichlet_rank(&self) -> usize {
        self.r_real + self.r_complex - 1
    }

    /// Generator value `σ(x)` at the place representative `place`.
    pub fn place_root(&self, place: usize) -> &Complex {
        &self.embeddings[self.places[place].embedding]
    }

    pub fn element(&self, coeffs: Vec<Rational>) -> Result<FieldElement> {
        let n = self.degree();
        if coeffs.len() > n {
            // reduce higher powers modulo p
            return Ok(self.reduce(&QPoly::new(coeffs)));
        }
        let mut c = coeffs;
        c.resize(n, Rational::new());
        Ok(FieldElement { coeffs: c })
    }

    pub fn element_from_ints(&self, coeffs: &[i64]) -> FieldElement {
        self.element(coeffs.iter().map(|&c| Rational::from(c)).collect())
            .expect("integer coordinates")
    }

    pub fn parse_element(&self, coeffs: &[String]) -> Result<FieldElement> {
        let v = coeffs.iter().map(|s| mp::parse_rational(s)).collect::<Result<Vec<_>>>()?;
        self.element(v)
    }

    pub fn from_int(&self, v: i64) -> FieldElement {
        self.element_from_ints(&[v])
    }

    pub fn zero(&self) -> FieldElement {
        self.from_int(0)
    }

    pub fn one(&self) -> FieldElement {
        self.from_int(1)
    }

    /// The generator `x` (for `n = 1` this is the rational root of `p`).
    pub fn generator(&self) -> FieldElement {
        self.reduce(&QPoly::new(vec![Rational::new(), Rational::from(1)]))
    }

    fn reduce(&self, p: &QPoly) -> FieldElement {
        let r = p.rem(&self.poly);
        let mut c = r.coeffs().to_vec();
        c.resize(self.degree(), Rational::new());
        FieldElement { coeffs: c }
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.reduce(&a.as_poly().mul(&b.as_poly()))
    }

    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement> {
        if a.is_zero() {
            return Err(Error::NotInvertible);
        }
        let (g, s) = a.as_poly().gcd_cofactor(&self.poly);
        if g.degree() != Some(0) {
            return Err(Error::NotInvertible);
        }
        Ok(self.reduce(&s))
    }

    pub fn pow(&self, a: &FieldElement, e: i64) -> Result<FieldElement> {
        let mut base = if e < 0 { self.inv(a)? } else { a.clone() };
        let mut k = e.unsigned_abs();
        let mut acc = self.one();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            k >>= 1;
        }
        Ok(acc)
    }

    /// `σ(elem)` for the place representative `place`.
    pub fn embed(&self, elem: &FieldElement, place: usize) -> Complex {
        elem.as_poly().eval(self.place_root(place), self.prec)
    }

    /// Values at all `n` embeddings, in [`Self::embeddings`] order.
    pub fn embed_all(&self, elem: &FieldElement) -> Vec<Complex> {
        let p = elem.as_poly();
        self.embeddings.iter().map(|z| p.eval(z, self.prec)).collect()
    }

    /// Exact norm `N(elem) = res(p, elem)`, computed on integer polynomials after clearing
    /// denominators.
    pub fn norm(&self, elem: &FieldElement) -> Rational {
        let p = elem.as_poly();
        if p.is_zero() {
            return Rational::new();
        }
        let den = p.denominator_lcm();
        let num: Vec<Integer> = p
            .coeffs()
            .iter()
            .map(|c| {
                let scaled = Rational::from(c * &den);
                scaled.numer().clone()
            })
            .collect();
        let res = resultant(&self.defining_poly, &num);
        Rational::from((res, den.pow(self.degree() as u32)))
    }

    /// Integral power-basis coordinates and norm `±1`. For orders that are not the full
    /// ring of integers in the power basis this under-reports units.
    pub fn verify_unit(&self, elem: &FieldElement) -> bool {
        if !elem.is_integral() {
            return false;
        }
        let nm = self.norm(elem);
        nm == 1 || nm == -1
    }
}

/// Simultaneous Aberth–Ehrlich iteration for all roots of a monic polynomial, followed by
/// a Newton polish at full precision.
fn aberth_ehrlich(p: &QPoly, prec: Precision) -> Result<Vec<Complex>> {
    let n = p.degree().expect("nonzero polynomial");
    let bits = prec.bits();
    let dp = p.derivative();
    if n == 1 {
        let c = p.coeffs();
        let root = Rational::from(-&c[0]) / c[1].clone();
        return Ok(vec![prec.creal(&prec.rational(&root))]);
    }
    let coeffs: Vec<f64> = p.coeffs().iter().map(|c| c.to_f64()).collect();
    let lead = coeffs[n];
    let center = -coeffs[n - 1] / (n as f64 * lead);
    let radius = (1..=n)
        .map(|k| (coeffs[n - k] / lead).abs().powf(1.0 / k as f64))
        .fold(0.0f64, f64::max)
        .max(1e-3)
        * 2.0;
    let mut z: Vec<Complex> = (0..n)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            let r = radius * (1.0 + 0.05 * k as f64 / n as f64);
            Complex::with_val(bits, (center + r * angle.cos(), r * angle.sin()))
        })
        .collect();

    let stop = Float::with_val(bits, Float::with_val(bits, 1) >> (bits as i32 - 16));
    let mut converged = false;
    for _ in 0..ABERTH_MAX_ITER {
        let mut worst = Float::new(bits);
        for k in 0..n {
            let pv = p.eval(&z[k], prec);
            let dv = dp.eval(&z[k], prec);
            if dv.is_zero() {
                z[k] += Complex::with_val(bits, (1e-8, 1e-8));
                worst = Float::with_val(bits, 1);
                continue;
            }
            let w = Complex::with_val(bits, &pv / &dv);
            let mut s = prec.czero();
            for j in 0..n {
                if j != k {
                    let diff = Complex::with_val(bits, &z[k] - &z[j]);
                    s += diff.recip();
                }
            }
            let denom = Complex::with_val(bits, 1) - Complex::with_val(bits, &w * &s);
            let corr = if denom.is_zero() { w } else { w / denom };
            let size = Float::with_val(bits, corr.abs_ref());
            let scale = Float::with_val(bits, z[k].abs_ref()).max(&Float::with_val(bits, 1));
            let rel = size / scale;
            if rel > worst {
                worst = rel;
            }
            z[k] -= corr;
        }
        if !worst.is_finite() {
            return Err(Error::NoConvergence("Aberth iteration diverged".into()));
        }
        if worst < stop {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence(format!("Aberth iteration cap {ABERTH_MAX_ITER} reached")));
    }
    for zk in &mut z {
        for _ in 0..3 {
            let pv = p.eval(zk, prec);
            let dv = dp.eval(zk, prec);
            if dv.is_zero() {
                break;
            }
            *zk -= pv / dv;
        }
    }
    Ok(z)
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum IntLiteral {
    Num(i64),
    Str(String),
}

impl IntLiteral {
    pub fn to_integer(&self) -> Result<Integer> {
        match self {
            IntLiteral::Num(v) => Ok(Integer::from(*v)),
            IntLiteral::Str(s) => Integer::parse(s.trim())
                .map(Integer::from)
                .map_err(|e| Error::Parse(format!("integer '{s}': {e}"))),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
pub struct ClassGroupSpec {
    pub orders: Vec<u64>,
}

/// JSON field descriptor: `{"poly": [c0, ..., 1], "digits": 50, "units": [["p/q", ...]],
/// "class_group": {"orders": [..]}}`.
#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct FieldDescriptor {
    pub poly: Vec<IntLiteral>,
    #[serde(default)]
    pub digits: Option<u32>,
    #[serde(default)]
    pub units: Vec<Vec<String>>,
    #[serde(default)]
    pub class_group: Option<ClassGroupSpec>,
}

/// A field with its declared units and class-group orders.
#[derive(Clone, Debug)]
pub struct FieldData {
    pub field: NumberField,
    pub units: Vec<FieldElement>,
    pub class_orders: Vec<u64>,
}

impl FieldDescriptor {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Builds the field; `digits_override` wins over the descriptor's own precision.
    pub fn build(&self, digits_override: Option<u32>) -> Result<FieldData> {
        let poly = self.poly.iter().map(IntLiteral::to_integer).collect::<Result<Vec<_>>>()?;
        let digits = digits_override.or(self.digits).unwrap_or(50);
        let field = NumberField::build(&poly, digits)?;
        let units = self.units.iter().map(|u| field.parse_element(u)).collect::<Result<Vec<_>>>()?;
        if let Some(cg) = &self.class_group {
            if cg.orders.contains(&0) {
                return Err(Error::Invalid("class group orders must be positive".into()));
            }
        }
        let class_orders = self.class_group.as_ref().map(|c| c.orders.clone()).unwrap_or_default();
        Ok(FieldData { field, units, class_orders })
    }
}

/// `1 + x + ... + x^(r-1)`.
pub fn cyclotomic_poly(r: u32) -> Vec<Integer> {
    vec![Integer::from(1); r as usize]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<Integer> {
        v.iter().map(|&c| Integer::from(c)).collect()
    }

    fn zsqrt2() -> NumberField {
        NumberField::build(&ints(&[-2, 0, 1]), 50).unwrap()
    }

    /// Bisection for sqrt(2) on [1, 2] in exact rationals; independent of the root finder.
    fn sqrt2_bisect(steps: u32) -> Rational {
        let (mut lo, mut hi) = (Rational::from(1), Rational::from(2));
        for _ in 0..steps {
            let mid = Rational::from(&lo + &hi) / 2u32;
            if Rational::from(mid.square_ref()) < 2 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    #[test]
    fn quadratic_field_has_two_real_places() {
        let k = zsqrt2();
        assert_eq!((k.r_real(), k.r_complex()), (2, 0));
        let root = Float::with_val(k.precision().bits(), k.place_root(1).real());
        let oracle = k.precision().rational(&sqrt2_bisect(200));
        assert!(mp::close(&root, &oracle, &k.precision().residual_tol()));
        // ascending order: -sqrt2 first
        assert!(Float::with_val(64, k.place_root(0).real()) < 0);
    }

    #[test]
    fn rational_field_and_cyclotomic_signatures() {
        let q = NumberField::build(&ints(&[-1, 1]), 50).unwrap();
        assert_eq!((q.r_real(), q.r_complex(), q.dirichlet_rank()), (1, 0, 0));
        let c5 = NumberField::build(&cyclotomic_poly(5), 50).unwrap();
        assert_eq!((c5.r_real(), c5.r_complex(), c5.dirichlet_rank()), (0, 2, 1));
        for pl in c5.places() {
            assert!(Float::with_val(64, c5.embeddings()[pl.embedding].imag()) > 0);
        }
        assert_eq!(zsqrt2().dirichlet_rank(), 1);
    }

    #[test]
    fn rejects_non_squarefree_and_non_monic() {
        assert!(matches!(NumberField::build(&ints(&[1, -2, 1]), 30), Err(Error::NotSquarefree)));
        assert!(matches!(NumberField::build(&ints(&[1, 2]), 30), Err(Error::NotMonic)));
        assert!(matches!(NumberField::build(&ints(&[3]), 30), Err(Error::NotMonic)));
    }

    #[test]
    fn embedding_values() {
        let k = zsqrt2();
        let p = k.precision();
        let one = k.embed(&k.one(), 0);
        assert!(mp::cdist(&one, &p.creal(&p.one())) < p.residual_tol());
        let e = k.element_from_ints(&[5, 1]);
        let s2 = Float::with_val(p.bits(), 2).sqrt();
        let plus = Float::with_val(p.bits(), k.embed(&e, 1).real());
        let minus = Float::with_val(p.bits(), k.embed(&e, 0).real());
        assert!(mp::close(&plus, &(Float::with_val(p.bits(), 5) + &s2), &p.residual_tol()));
        assert!(mp::close(&minus, &(Float::with_val(p.bits(), 5) - &s2), &p.residual_tol()));
        assert!(mp::fmt_float(&plus, 30).starts_with("6.41421356"));
        assert!(mp::fmt_float(&minus, 30).starts_with("3.58578643"));
    }

    #[test]
    fn exact_norms() {
        let k = zsqrt2();
        assert_eq!(k.norm(&k.one()), 1);
        assert_eq!(k.norm(&k.element_from_ints(&[1, 1])), -1);
        assert_eq!(k.norm(&k.element_from_ints(&[5, 1])), 23);
        let half = k.element(vec![Rational::from(1), Rational::from((1, 2))]).unwrap();
        assert_eq!(k.norm(&half), Rational::from((1, 2)));
    }

    #[test]
    fn unit_checks() {
        let k = zsqrt2();
        assert!(k.verify_unit(&k.from_int(-1)));
        assert!(k.verify_unit(&k.element_from_ints(&[1, 1])));
        let half = k.element(vec![Rational::from(1), Rational::from((1, 2))]).unwrap();
        assert!(!k.verify_unit(&half));
        assert!(!k.verify_unit(&k.element_from_ints(&[5, 1])));
    }

    #[test]
    fn inverse_and_powers() {
        let k = zsqrt2();
        let u = k.element_from_ints(&[1, 1]);
        let inv = k.inv(&u).unwrap();
        assert_eq!(k.mul(&u, &inv), k.one());
        assert_eq!(inv, k.element_from_ints(&[-1, 1]));
        assert_eq!(k.pow(&u, 2).unwrap(), k.element_from_ints(&[3, 2]));
        assert_eq!(k.pow(&u, -1).unwrap(), inv);
        assert!(matches!(k.inv(&k.zero()), Err(Error::NotInvertible)));
    }

    #[test]
    fn build_is_deterministic() {
        let a = NumberField::build(&cyclotomic_poly(7), 60).unwrap();
        let b = NumberField::build(&cyclotomic_poly(7), 60).unwrap();
        assert_eq!(a.embeddings(), b.embeddings());
        assert_eq!(a.places(), b.places());
    }

    #[test]
    fn descriptor_roundtrip() {
        let text = r#"{"poly": [-2, 0, 1], "digits": 40, "units": [["-1"], ["1/1", "1/1"]],
                       "class_group": {"orders": [2]}}"#;
        let data = FieldDescriptor::from_json(text).unwrap().build(None).unwrap();
        assert_eq!(data.field.digits(), 40);
        assert_eq!(data.units.len(), 2);
        assert_eq!(data.units[0], data.field.from_int(-1));
        assert_eq!(data.class_orders, vec![2]);
        let big = r#"{"poly": ["-2", "0", "1"]}"#;
        assert_eq!(FieldDescriptor::from_json(big).unwrap().build(Some(30)).unwrap().field.digits(), 30);
    }
}
