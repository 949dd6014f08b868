//! Graded coefficient spaces, the regulator lattice and point-level differential K-classes.

use rug::{Float, Integer};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::mp::{self, Precision};
use crate::numfield::{FieldElement, NumberField, PlaceKind};
use crate::poly::integer_det;

/// Lovász constant for lattice reduction.
pub const LLL_DELTA: f64 = 0.99;

const LLL_MAX_STEPS: usize = 200_000;

/// A coefficient vector over `Σ*` in degree `2j+1`.
#[derive(Clone, Debug)]
pub struct FormElement {
    j: u32,
    coeffs: Vec<Float>,
}

impl FormElement {
    pub fn new(j: u32, coeffs: Vec<Float>) -> Self {
        FormElement { j, coeffs }
    }

    /// Rejects nonzero real-place coefficients in odd `j`.
    pub fn checked(field: &NumberField, j: u32, coeffs: Vec<Float>) -> Result<Self> {
        if coeffs.len() != field.num_places() {
            return Err(Error::Dimension(format!(
                "expected {} coefficients, got {}",
                field.num_places(),
                coeffs.len()
            )));
        }
        if j % 2 == 1 {
            for (pl, c) in field.places().iter().zip(&coeffs) {
                if pl.kind == PlaceKind::Real && !c.is_zero() {
                    return Err(Error::Invalid(format!(
                        "odd j = {j} requires zero coefficients at real places"
                    )));
                }
            }
        }
        Ok(FormElement { j, coeffs })
    }

    pub fn zero(j: u32, places: usize, prec: Precision) -> Self {
        FormElement { j, coeffs: vec![prec.zero(); places] }
    }

    pub fn j(&self) -> u32 {
        self.j
    }

    /// Form degree `2j+1`.
    pub fn degree(&self) -> u32 {
        2 * self.j + 1
    }

    pub fn coeffs(&self) -> &[Float] {
        &self.coeffs
    }

    fn zip(&self, other: &FormElement, f: impl Fn(&Float, &Float) -> Float) -> Result<FormElement> {
        if self.j != other.j || self.coeffs.len() != other.coeffs.len() {
            return Err(Error::Dimension("form elements of different shape".into()));
        }
        Ok(FormElement { j: self.j, coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| f(a, b)).collect() })
    }

    pub fn add(&self, other: &FormElement) -> Result<FormElement> {
        self.zip(other, |a, b| Float::with_val(a.prec().max(b.prec()), a + b))
    }

    pub fn sub(&self, other: &FormElement) -> Result<FormElement> {
        self.zip(other, |a, b| Float::with_val(a.prec().max(b.prec()), a - b))
    }

    pub fn neg(&self) -> FormElement {
        FormElement { j: self.j, coeffs: self.coeffs.iter().map(|c| Float::with_val(c.prec(), -c)).collect() }
    }

    pub fn scale(&self, s: &Float) -> FormElement {
        FormElement {
            j: self.j,
            coeffs: self.coeffs.iter().map(|c| Float::with_val(c.prec().max(s.prec()), c * s)).collect(),
        }
    }

    /// Coordinates in `R^{Σ*}/<(1,...,1)>`: `c_σ - c_0` for `σ = 1..s-1`.
    pub fn quotient_coords(&self) -> Vec<Float> {
        match self.coeffs.split_first() {
            None => Vec::new(),
            Some((c0, rest)) => rest.iter().map(|c| Float::with_val(c.prec(), c - c0)).collect(),
        }
    }

    /// Degree-1 representative with `c_0 = 0`.
    pub fn from_quotient_coords(coords: &[Float], prec: Precision) -> FormElement {
        let mut coeffs = Vec::with_capacity(coords.len() + 1);
        coeffs.push(prec.zero());
        coeffs.extend(coords.iter().cloned());
        FormElement { j: 0, coeffs }
    }

    /// The normalized representative of the quotient class (degree 1 only).
    pub fn projected(&self, prec: Precision) -> FormElement {
        FormElement::from_quotient_coords(&self.quotient_coords(), prec)
    }

    pub fn to_json(&self, digits: u32) -> Value {
        json!({
            "degree": self.degree(),
            "j": self.j,
            "coeffs": sigma_map(&self.coeffs, digits),
        })
    }

    /// Accepts `{"j": .., "coeffs": {"sigma_i": ".."}}`, `{"coeffs": [..]}` or a bare array.
    pub fn from_json(v: &Value, places: usize, prec: Precision) -> Result<FormElement> {
        let (j, coeffs) = match v {
            Value::Object(m) => {
                let j = match (m.get("j"), m.get("degree")) {
                    (Some(j), _) => json_u32(j)?,
                    (None, Some(d)) => {
                        let d = json_u32(d)?;
                        if d % 2 == 0 {
                            return Err(Error::Parse(format!("degree {d} is not odd")));
                        }
                        d / 2
                    }
                    (None, None) => 0,
                };
                let c = m.get("coeffs").ok_or_else(|| Error::Parse("missing 'coeffs'".into()))?;
                (j, c)
            }
            other => (0, other),
        };
        let coeffs = parse_sigma_values(coeffs, places, prec)?;
        Ok(FormElement { j, coeffs })
    }
}

fn json_u32(v: &Value) -> Result<u32> {
    v.as_u64()
        .and_then(|x| u32::try_from(x).ok())
        .ok_or_else(|| Error::Parse(format!("expected a small nonnegative integer, got {v}")))
}

pub fn json_real(v: &Value, prec: Precision) -> Result<Float> {
    match v {
        Value::String(s) => mp::parse_float(s, prec),
        Value::Number(n) => mp::parse_float(&n.to_string(), prec),
        other => Err(Error::Parse(format!("expected a real, got {other}"))),
    }
}

/// `{"sigma_0": "..", ...}` keyed by place index.
pub fn sigma_map(values: &[Float], digits: u32) -> Value {
    let mut m = Map::new();
    for (i, c) in values.iter().enumerate() {
        m.insert(format!("sigma_{i}"), Value::String(mp::fmt_float(c, digits)));
    }
    Value::Object(m)
}

/// Reads a per-place vector from either a `sigma_i` map or an array.
pub fn parse_sigma_values(v: &Value, places: usize, prec: Precision) -> Result<Vec<Float>> {
    let out = match v {
        Value::Array(a) => a.iter().map(|x| json_real(x, prec)).collect::<Result<Vec<_>>>()?,
        Value::Object(m) => {
            let mut out = vec![prec.zero(); places];
            for (k, x) in m {
                let idx: usize = k
                    .strip_prefix("sigma_")
                    .and_then(|i| i.parse().ok())
                    .ok_or_else(|| Error::Parse(format!("bad place key '{k}'")))?;
                if idx >= places {
                    return Err(Error::Dimension(format!("place index {idx} out of range")));
                }
                out[idx] = json_real(x, prec)?;
            }
            out
        }
        other => return Err(Error::Parse(format!("expected per-place values, got {other}"))),
    };
    if out.len() != places {
        return Err(Error::Dimension(format!("expected {places} per-place values, got {}", out.len())));
    }
    Ok(out)
}

/// `½·ln|σ(u)|` at each place, projected to the quotient.
pub fn unit_log(field: &NumberField, unit: &FieldElement) -> Result<FormElement> {
    if !field.verify_unit(unit) {
        return Err(Error::NotAUnit(format!("{:?}", unit.to_strings())));
    }
    Ok(half_log_abs(field, unit).projected(field.precision()))
}

/// Raw `½·ln|σ(x)|` over `Σ*` without projection.
pub(crate) fn half_log_abs(field: &NumberField, x: &FieldElement) -> FormElement {
    let bits = field.precision().bits();
    let coeffs = (0..field.num_places())
        .map(|p| {
            let v = field.embed(x, p);
            Float::with_val(bits, v.abs_ref()).ln() / 2u32
        })
        .collect();
    FormElement::new(0, coeffs)
}

fn dot(a: &[Float], b: &[Float], bits: u32) -> Float {
    let mut acc = Float::new(bits);
    for (x, y) in a.iter().zip(b) {
        acc += Float::with_val(bits, x * y);
    }
    acc
}

fn norm(a: &[Float], bits: u32) -> Float {
    dot(a, a, bits).sqrt()
}

struct GramSchmidt {
    bstar: Vec<Vec<Float>>,
    sq: Vec<Float>,
    mu: Vec<Vec<Float>>,
}

fn gram_schmidt(b: &[Vec<Float>], bits: u32) -> GramSchmidt {
    let n = b.len();
    let mut bstar: Vec<Vec<Float>> = Vec::with_capacity(n);
    let mut sq = Vec::with_capacity(n);
    let mut mu = vec![vec![Float::new(bits); n]; n];
    for i in 0..n {
        let mut v = b[i].clone();
        for j in 0..i {
            let m = if sq[j] == 0 { Float::new(bits) } else { dot(&b[i], &bstar[j], bits) / &sq[j] };
            for (vk, bk) in v.iter_mut().zip(&bstar[j]) {
                *vk -= Float::with_val(bits, &m * bk);
            }
            mu[i][j] = m;
        }
        sq.push(dot(&v, &v, bits));
        bstar.push(v);
    }
    GramSchmidt { bstar, sq, mu }
}

fn axpy_int(dst: &mut [Float], q: &Integer, src: &[Float], bits: u32) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d -= Float::with_val(bits, s * q);
    }
}

/// LLL reduction of linearly independent rows, returning the reduced rows and the
/// integer transform `T` with `reduced = T · input`.
fn lll(mut b: Vec<Vec<Float>>, bits: u32) -> Result<(Vec<Vec<Float>>, Vec<Vec<Integer>>)> {
    let n = b.len();
    let mut t: Vec<Vec<Integer>> =
        (0..n).map(|i| (0..n).map(|j| Integer::from((i == j) as i32)).collect()).collect();
    if n < 2 {
        return Ok((b, t));
    }
    let delta = Float::with_val(bits, LLL_DELTA);
    let mut k = 1;
    let mut steps = 0;
    while k < n {
        steps += 1;
        if steps > LLL_MAX_STEPS {
            return Err(Error::NoConvergence("lattice reduction step cap reached".into()));
        }
        let mut gs = gram_schmidt(&b, bits);
        for j in (0..k).rev() {
            let q = mp::round_to_integer(&gs.mu[k][j]);
            if q != 0 {
                let bj = b[j].clone();
                axpy_int(&mut b[k], &q, &bj, bits);
                let tj = t[j].clone();
                for (x, y) in t[k].iter_mut().zip(&tj) {
                    *x -= Integer::from(y * &q);
                }
                for i in 0..j {
                    let d = Float::with_val(bits, &gs.mu[j][i] * &q);
                    gs.mu[k][i] -= d;
                }
                gs.mu[k][j] -= Float::with_val(bits, &q);
            }
        }
        let m = Float::with_val(bits, gs.mu[k][k - 1].square_ref());
        let rhs = Float::with_val(bits, &delta - &m) * &gs.sq[k - 1];
        if gs.sq[k] >= rhs {
            k += 1;
        } else {
            b.swap(k, k - 1);
            t.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    Ok((b, t))
}

/// The lattice `c(R*)` in quotient coordinates, LLL-reduced.
#[derive(Clone, Debug)]
pub struct RegulatorLattice {
    prec: Precision,
    dim: usize,
    unit_images: Vec<FormElement>,
    basis: Vec<Vec<Float>>,
    transform: Vec<Vec<Integer>>,
    tol: Float,
}

impl RegulatorLattice {
    /// The zero lattice in a quotient space of dimension `places - 1`.
    pub fn trivial(places: usize, prec: Precision) -> Self {
        RegulatorLattice {
            prec,
            dim: places.saturating_sub(1),
            unit_images: Vec::new(),
            basis: Vec::new(),
            transform: Vec::new(),
            tol: prec.lattice_tol(),
        }
    }

    /// Reduces the span of `generators` (degree-1 forms, possibly dependent) with an
    /// augmented-identity LLL that exposes integer relations, then a plain LLL on what is left.
    pub fn from_generators(generators: Vec<FormElement>, places: usize, prec: Precision) -> Result<Self> {
        let bits = prec.bits();
        let dim = places.saturating_sub(1);
        let tol = prec.lattice_tol();
        let vs: Vec<Vec<Float>> = generators.iter().map(FormElement::quotient_coords).collect();
        let m = vs.len();
        if m == 0 || dim == 0 {
            let transform =
                (0..m).map(|i| (0..m).map(|j| Integer::from((i == j) as i32)).collect()).collect();
            return Ok(RegulatorLattice { prec, dim, unit_images: generators, basis: Vec::new(), transform, tol });
        }
        let scale = prec.pow10(prec.digits() as i64 / 2);
        let augmented: Vec<Vec<Float>> = (0..m)
            .map(|i| {
                let mut row: Vec<Float> = (0..m).map(|j| Float::with_val(bits, (i == j) as i32)).collect();
                row.extend(vs[i].iter().map(|x| Float::with_val(bits, x * &scale)));
                row
            })
            .collect();
        let (_, t1) = lll(augmented, bits)?;
        let combine = |row: &[Integer]| -> Vec<Float> {
            let mut acc = vec![Float::new(bits); dim];
            for (c, v) in row.iter().zip(&vs) {
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += Float::with_val(bits, x * c);
                }
            }
            acc
        };
        let mut relations = Vec::new();
        let mut kept_rows = Vec::new();
        let mut kept_vecs = Vec::new();
        for row in t1 {
            let v = combine(&row);
            if norm(&v, bits) < tol {
                relations.push(row);
            } else {
                kept_vecs.push(v);
                kept_rows.push(row);
            }
        }
        if kept_vecs.len() > dim {
            return Err(Error::NoConvergence("unit images are not a lattice at this precision".into()));
        }
        let (_, t2) = lll(kept_vecs, bits)?;
        let mut transform: Vec<Vec<Integer>> = t2
            .iter()
            .map(|r| {
                let mut acc = vec![Integer::new(); m];
                for (c, row) in r.iter().zip(&kept_rows) {
                    for (a, x) in acc.iter_mut().zip(row) {
                        *a += Integer::from(x * c);
                    }
                }
                acc
            })
            .collect();
        let basis: Vec<Vec<Float>> = transform.iter().map(|r| combine(r)).collect();
        transform.extend(relations);
        let det = integer_det(transform.clone());
        if det.clone().abs() != 1 {
            return Err(Error::NoConvergence(format!("basis change has determinant {det}")));
        }
        Ok(RegulatorLattice { prec, dim, unit_images: generators, basis, transform, tol })
    }

    pub fn with_tolerance(mut self, tol: Float) -> Self {
        self.tol = tol;
        self
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Dimension of the ambient quotient space, `|Σ*| - 1`.
    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn tol(&self) -> &Float {
        &self.tol
    }

    pub fn unit_images(&self) -> &[FormElement] {
        &self.unit_images
    }

    /// Reduced basis in quotient coordinates.
    pub fn basis(&self) -> &[Vec<Float>] {
        &self.basis
    }

    /// Integer unimodular matrix whose first `rank` rows express the reduced basis in the
    /// generators; the remaining rows are integer relations among them.
    pub fn transform(&self) -> &[Vec<Integer>] {
        &self.transform
    }

    /// Babai nearest-plane reduction of quotient coordinates.
    pub fn reduce_coords(&self, coords: &[Float]) -> (Vec<Float>, bool) {
        let bits = self.prec.bits();
        let mut t: Vec<Float> = coords.iter().map(|c| Float::with_val(bits, c)).collect();
        if !self.basis.is_empty() {
            let gs = gram_schmidt(&self.basis, bits);
            for j in (0..self.basis.len()).rev() {
                let c = dot(&t, &gs.bstar[j], bits) / &gs.sq[j];
                let q = mp::round_to_integer(&c);
                if q != 0 {
                    axpy_int(&mut t, &q, &self.basis[j], bits);
                }
            }
        }
        let zero = norm(&t, bits) < self.tol;
        (t, zero)
    }

    pub fn to_json(&self, digits: u32) -> Value {
        let basis: Vec<Value> = self
            .basis
            .iter()
            .map(|b| Value::Array(b.iter().map(|x| Value::String(mp::fmt_float(x, digits))).collect()))
            .collect();
        let lengths: Vec<Value> =
            self.basis.iter().map(|b| Value::String(mp::fmt_float(&norm(b, self.prec.bits()), digits))).collect();
        let transform: Vec<Value> = self
            .transform
            .iter()
            .map(|r| Value::Array(r.iter().map(|x| Value::String(x.to_string())).collect()))
            .collect();
        json!({
            "rank": self.rank(),
            "ambient_dim": self.dim,
            "basis": basis,
            "lengths": lengths,
            "transform": transform,
            "tol": mp::fmt_float(&self.tol, 6),
        })
    }
}

/// Builds `c(R*)` from a list of units; torsion units contribute nothing.
pub fn build_lattice(field: &NumberField, units: &[FieldElement]) -> Result<RegulatorLattice> {
    let images = units.iter().map(|u| unit_log(field, u)).collect::<Result<Vec<_>>>()?;
    let lat = RegulatorLattice::from_generators(images, field.num_places(), field.precision())?;
    if lat.rank() > field.dirichlet_rank() {
        return Err(Error::NoConvergence("lattice rank exceeds the Dirichlet rank".into()));
    }
    Ok(lat)
}

/// A degree-1 class modulo the regulator lattice, stored in reduced quotient coordinates.
#[derive(Clone, Debug)]
pub struct TorusElement {
    coords: Vec<Float>,
}

impl TorusElement {
    pub fn zero(dim: usize, prec: Precision) -> Self {
        TorusElement { coords: vec![prec.zero(); dim] }
    }

    pub fn coords(&self) -> &[Float] {
        &self.coords
    }

    /// Normalized degree-1 representative (`c_0 = 0`).
    pub fn rep(&self, prec: Precision) -> FormElement {
        FormElement::from_quotient_coords(&self.coords, prec)
    }

    pub fn norm(&self, bits: u32) -> Float {
        norm(&self.coords, bits)
    }
}

/// `(TorusElement, is_zero)` for a degree-1 form.
pub fn reduce_mod_lattice(lattice: &RegulatorLattice, f: &FormElement) -> Result<(TorusElement, bool)> {
    if f.j() != 0 {
        return Err(Error::Invalid(format!("expected a degree-1 form, got degree {}", f.degree())));
    }
    let q = f.quotient_coords();
    if q.len() != lattice.ambient_dim() {
        return Err(Error::Dimension(format!(
            "form has {} quotient coordinates, lattice expects {}",
            q.len(),
            lattice.ambient_dim()
        )));
    }
    let (coords, zero) = lattice.reduce_coords(&q);
    Ok((TorusElement { coords }, zero))
}

/// A class in `KR^0` of a point: rank, class-group label, flat torus part.
#[derive(Clone, Debug)]
pub struct PointClass {
    pub rank: Integer,
    pub cls: Vec<i64>,
    pub torus: TorusElement,
}

impl PointClass {
    pub fn to_json(&self, digits: u32, prec: Precision) -> Value {
        json!({
            "rank": self.rank.to_string(),
            "cls": self.cls,
            "torus": sigma_map(self.torus.rep(prec).coeffs(), digits),
        })
    }
}

/// Lattice plus class-group orders: everything needed for the group law on `PointClass`.
#[derive(Clone, Debug)]
pub struct KContext {
    pub lattice: RegulatorLattice,
    pub class_orders: Vec<u64>,
}

impl KContext {
    pub fn new(lattice: RegulatorLattice, class_orders: Vec<u64>) -> Self {
        KContext { lattice, class_orders }
    }

    pub fn precision(&self) -> Precision {
        self.lattice.precision()
    }

    fn normalize_cls(&self, cls: &[i64]) -> Result<Vec<i64>> {
        if cls.len() != self.class_orders.len() {
            return Err(Error::Dimension(format!(
                "class label has {} entries, class group has {} factors",
                cls.len(),
                self.class_orders.len()
            )));
        }
        Ok(cls.iter().zip(&self.class_orders).map(|(c, &o)| c.rem_euclid(o as i64)).collect())
    }

    pub fn zero(&self) -> PointClass {
        PointClass {
            rank: Integer::new(),
            cls: vec![0; self.class_orders.len()],
            torus: TorusElement::zero(self.lattice.ambient_dim(), self.precision()),
        }
    }

    /// The unit class `𝟙 = (1, 0, 0)`.
    pub fn one(&self) -> PointClass {
        PointClass { rank: Integer::from(1), ..self.zero() }
    }

    /// Builds a class, reducing the label and torus part.
    pub fn make(&self, rank: Integer, cls: &[i64], torus: &FormElement) -> Result<PointClass> {
        let (t, _) = reduce_mod_lattice(&self.lattice, torus)?;
        Ok(PointClass { rank, cls: self.normalize_cls(cls)?, torus: t })
    }

    fn torus_combine(&self, a: &TorusElement, b: &TorusElement, sign: i32) -> TorusElement {
        let bits = self.precision().bits();
        let sum: Vec<Float> = a
            .coords
            .iter()
            .zip(&b.coords)
            .map(|(x, y)| if sign >= 0 { Float::with_val(bits, x + y) } else { Float::with_val(bits, x - y) })
            .collect();
        TorusElement { coords: self.lattice.reduce_coords(&sum).0 }
    }

    pub fn class_add(&self, x: &PointClass, y: &PointClass) -> Result<PointClass> {
        let cls: Vec<i64> = x.cls.iter().zip(&y.cls).map(|(a, b)| a + b).collect();
        if x.cls.len() != y.cls.len() {
            return Err(Error::Dimension("class labels of different length".into()));
        }
        Ok(PointClass {
            rank: Integer::from(&x.rank + &y.rank),
            cls: self.normalize_cls(&cls)?,
            torus: self.torus_combine(&x.torus, &y.torus, 1),
        })
    }

    pub fn class_neg(&self, x: &PointClass) -> Result<PointClass> {
        let cls: Vec<i64> = x.cls.iter().map(|c| -c).collect();
        Ok(PointClass {
            rank: Integer::from(-&x.rank),
            cls: self.normalize_cls(&cls)?,
            torus: self.torus_combine(&TorusElement::zero(x.torus.coords.len(), self.precision()), &x.torus, -1),
        })
    }

    pub fn class_sub(&self, x: &PointClass, y: &PointClass) -> Result<PointClass> {
        self.class_add(x, &self.class_neg(y)?)
    }

    /// Equality of classes: exact rank and label, torus difference inside the lattice.
    pub fn class_eq(&self, x: &PointClass, y: &PointClass) -> bool {
        if x.rank != y.rank || x.cls != y.cls || x.torus.coords.len() != y.torus.coords.len() {
            return false;
        }
        let d = self.torus_combine(&x.torus, &y.torus, -1);
        d.norm(self.precision().bits()) < *self.lattice.tol()
    }

    pub fn is_zero(&self, x: &PointClass) -> bool {
        self.class_eq(x, &self.zero())
    }

    /// `a(f) = (0, 0, f mod lattice)`.
    pub fn a_map(&self, f: &FormElement) -> Result<PointClass> {
        self.make(Integer::new(), &vec![0; self.class_orders.len()], f)
    }

    /// `(n, 0, ¼ Σ ln det G_σ · b₁(σ))` for a free module of rank `n` with per-place Grams.
    pub fn cycl_free(&self, grams: &[CMatrix]) -> Result<PointClass> {
        let f = cycl_form(grams, self.lattice.ambient_dim() + 1)?;
        let n = grams.first().map_or(0, CMatrix::rows);
        self.make(Integer::from(n), &vec![0; self.class_orders.len()], &f)
    }

    /// `x + a(½ Σ ln|λ_σ| b₁(σ))`.
    pub fn scale_class(&self, x: &PointClass, lambdas: &[Float]) -> Result<PointClass> {
        let places = self.lattice.ambient_dim() + 1;
        if lambdas.len() != places {
            return Err(Error::Dimension(format!("expected {places} scale factors, got {}", lambdas.len())));
        }
        let bits = self.precision().bits();
        let mut coeffs = Vec::with_capacity(places);
        for l in lambdas {
            if l.is_zero() || !l.is_finite() {
                return Err(Error::Invalid("scale factors must be nonzero and finite".into()));
            }
            coeffs.push(Float::with_val(bits, l.abs_ref()).ln() / 2u32);
        }
        let shift = self.a_map(&FormElement::new(0, coeffs))?;
        self.class_add(x, &shift)
    }
}

/// Unreduced torus coefficient `¼ ln det G_σ` at each place.
pub fn cycl_form(grams: &[CMatrix], places: usize) -> Result<FormElement> {
    if grams.len() != places {
        return Err(Error::Dimension(format!("expected {places} Gram matrices, got {}", grams.len())));
    }
    let n = grams.first().map_or(0, CMatrix::rows);
    let mut coeffs = Vec::with_capacity(places);
    for (i, g) in grams.iter().enumerate() {
        if !g.is_square() || g.rows() != n {
            return Err(Error::Dimension(format!("Gram matrix at place {i} is not {n}x{n}")));
        }
        let ld = g.log_det_hpd().map_err(|e| match e {
            Error::NotPositiveDefinite(m) => Error::NotPositiveDefinite(format!("place {i}: {m}")),
            other => other,
        })?;
        coeffs.push(ld / 4u32);
    }
    Ok(FormElement::new(0, coeffs))
}
