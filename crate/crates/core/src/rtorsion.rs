//! Reidemeister torsion of metrized cochain complexes and the point-level Euler identity.

use rug::{Complex, Float};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::flatmodel::{FormElement, KContext, PointClass};
use crate::linalg::CMatrix;
use crate::modtors::{zhat, TorsionPresentation};
use crate::mp::{self, Precision};
use crate::numfield::{FieldElement, NumberField};

/// Eigenvalues within this factor of the zero cutoff make the numerical rank ambiguous.
pub const RANK_MARGIN: u32 = 1000;

/// `0 → C⁰ → C¹ → … → Cⁿ → 0` over `C` with Gram matrices on cochains and cohomology.
#[derive(Clone, Debug)]
pub struct MetrizedComplexAtPlace {
    prec: Precision,
    dims: Vec<usize>,
    differentials: Vec<CMatrix>,
    grams: Vec<CMatrix>,
    coh_grams: Vec<CMatrix>,
    coh_maps: Vec<CMatrix>,
}

/// Kernel data of one combinatorial Laplacian.
#[derive(Clone, Debug)]
pub struct DegreeCohomology {
    pub dim: usize,
    pub eigenvalues: Vec<Float>,
    /// Harmonic cochains, orthonormal for the cochain Gram, as columns.
    pub harmonic: CMatrix,
    /// `ln det′ Δ_i`.
    pub log_det_prime: Float,
}

impl MetrizedComplexAtPlace {
    /// Validates shapes, `d∘d = 0`, positivity of all Grams and the cocycle condition.
    /// Missing cohomology data means "no chosen classes": supply it whenever cohomology is
    /// nonzero.
    pub fn new(
        dims: Vec<usize>,
        differentials: Vec<CMatrix>,
        grams: Vec<CMatrix>,
        coh_grams: Vec<CMatrix>,
        coh_maps: Vec<CMatrix>,
        prec: Precision,
    ) -> Result<Self> {
        let n = dims.len();
        if n == 0 {
            return Err(Error::InvalidComplex("complex needs at least one cochain group".into()));
        }
        if differentials.len() != n - 1 {
            return Err(Error::InvalidComplex(format!("expected {} differentials, got {}", n - 1, differentials.len())));
        }
        for (i, d) in differentials.iter().enumerate() {
            if d.rows() != dims[i + 1] || d.cols() != dims[i] {
                return Err(Error::InvalidComplex(format!(
                    "d_{i} is {}x{}, expected {}x{}",
                    d.rows(),
                    d.cols(),
                    dims[i + 1],
                    dims[i]
                )));
            }
        }
        if grams.len() != n || coh_grams.len() != n || coh_maps.len() != n {
            return Err(Error::InvalidComplex("one Gram, cohomology Gram and cohomology map per degree".into()));
        }
        let tol = prec.residual_tol();
        for i in 0..n.saturating_sub(2) {
            let dd = differentials[i + 1].mul(&differentials[i])?;
            if dd.frobenius_norm() >= tol {
                return Err(Error::InvalidComplex(format!("d_{} d_{i} is not zero", i + 1)));
            }
        }
        for i in 0..n {
            if grams[i].rows() != dims[i] || !grams[i].is_square() {
                return Err(Error::InvalidComplex(format!("cochain Gram {i} has the wrong size")));
            }
            grams[i].cholesky().map_err(|e| Error::NotPositiveDefinite(format!("cochain Gram {i}: {e}")))?;
            let h = coh_maps[i].cols();
            if coh_maps[i].rows() != dims[i] {
                return Err(Error::InvalidComplex(format!("cohomology map {i} has {} rows", coh_maps[i].rows())));
            }
            if coh_grams[i].rows() != h || !coh_grams[i].is_square() {
                return Err(Error::InvalidComplex(format!("cohomology Gram {i} must be {h}x{h}")));
            }
            coh_grams[i].cholesky().map_err(|e| Error::NotPositiveDefinite(format!("cohomology Gram {i}: {e}")))?;
            if i + 1 < n && h > 0 {
                let img = differentials[i].mul(&coh_maps[i])?;
                if img.frobenius_norm() >= tol {
                    return Err(Error::InvalidComplex(format!("cohomology map {i} has non-cocycle columns")));
                }
            }
        }
        Ok(MetrizedComplexAtPlace { prec, dims, differentials, grams, coh_grams, coh_maps })
    }

    /// Standard Grams, no cohomology classes.
    pub fn acyclic_standard(dims: Vec<usize>, differentials: Vec<CMatrix>, prec: Precision) -> Result<Self> {
        let grams = dims.iter().map(|&d| CMatrix::identity(d, prec)).collect();
        let coh_grams = dims.iter().map(|_| CMatrix::identity(0, prec)).collect();
        let coh_maps = dims.iter().map(|&d| CMatrix::zeros(d, 0, prec)).collect();
        Self::new(dims, differentials, grams, coh_grams, coh_maps, prec)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn differentials(&self) -> &[CMatrix] {
        &self.differentials
    }

    pub fn grams(&self) -> &[CMatrix] {
        &self.grams
    }

    pub fn cohomology_grams(&self) -> &[CMatrix] {
        &self.coh_grams
    }

    pub fn cohomology_maps(&self) -> &[CMatrix] {
        &self.coh_maps
    }

    /// Differentials in Cholesky-orthonormal coordinates, `d̃_i = L_{i+1}^* d_i L_i^{-*}`,
    /// together with `L_i^{-*}` for mapping back.
    fn orthonormal_frame(&self) -> Result<(Vec<CMatrix>, Vec<CMatrix>, Vec<CMatrix>)> {
        let mut l_adj = Vec::with_capacity(self.dims.len());
        let mut l_inv_adj = Vec::with_capacity(self.dims.len());
        for g in &self.grams {
            let l = g.cholesky()?;
            l_inv_adj.push(l.lower_triangular_inverse()?.adjoint());
            l_adj.push(l.adjoint());
        }
        let dt = self
            .differentials
            .iter()
            .enumerate()
            .map(|(i, d)| l_adj[i + 1].mul(d)?.mul(&l_inv_adj[i]))
            .collect::<Result<Vec<_>>>()?;
        Ok((dt, l_adj, l_inv_adj))
    }

    /// Laplacians `Δ_i = d_i^* d_i + d_{i-1} d_{i-1}^*` (adjoints for the Grams), their
    /// kernels and regularized determinants.
    pub fn cohomology(&self) -> Result<Vec<DegreeCohomology>> {
        let (dt, _, l_inv_adj) = self.orthonormal_frame()?;
        let bits = self.prec.bits();
        let cutoff = self.prec.half_tol();
        let lo = Float::with_val(bits, &cutoff / RANK_MARGIN);
        let hi = Float::with_val(bits, &cutoff * RANK_MARGIN);
        let n = self.dims.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut lap = CMatrix::zeros(self.dims[i], self.dims[i], self.prec);
            if i + 1 < n {
                lap = lap.add(&dt[i].adjoint().mul(&dt[i])?)?;
            }
            if i > 0 {
                lap = lap.add(&dt[i - 1].mul(&dt[i - 1].adjoint())?)?;
            }
            let (vals, vecs) = lap.hermitian_eigen()?;
            let mut kernel = Vec::new();
            let mut log_det_prime = Float::new(bits);
            for (k, v) in vals.iter().enumerate() {
                if *v > lo && *v < hi {
                    return Err(Error::RankAmbiguous(format!(
                        "degree {i}: eigenvalue {} near cutoff {}",
                        mp::fmt_float(v, 6),
                        mp::fmt_float(&cutoff, 3)
                    )));
                }
                if *v <= lo {
                    kernel.push(vecs.column(k));
                } else {
                    log_det_prime += Float::with_val(bits, v.ln_ref());
                }
            }
            let k_tilde = CMatrix::from_columns(&kernel, self.dims[i], self.prec);
            let harmonic = l_inv_adj[i].mul(&k_tilde)?;
            out.push(DegreeCohomology { dim: kernel.len(), eigenvalues: vals, harmonic, log_det_prime });
        }
        Ok(out)
    }

    /// `ln τ`. Laplacian part `½ Σ (-1)^i i ln det′Δ_i` plus the base change
    /// `½ Σ (-1)^i (ln det Harm_i - ln det H_i)`, where `Harm_i` is the Gram of the harmonic
    /// projections of the chosen cocycles.
    pub fn log_reidemeister(&self) -> Result<Float> {
        let coh = self.cohomology()?;
        let bits = self.prec.bits();
        let mut acc = Float::new(bits);
        for (i, c) in coh.iter().enumerate() {
            let h = self.coh_maps[i].cols();
            if h != c.dim {
                return Err(Error::InvalidComplex(format!(
                    "degree {i}: {h} cohomology classes supplied, cohomology has dimension {}",
                    c.dim
                )));
            }
            let sign = if i % 2 == 0 { 1 } else { -1 };
            let lap = Float::with_val(bits, &c.log_det_prime * (sign * i as i64));
            acc += lap;
            if h > 0 {
                // coefficients of the harmonic projection in the orthonormal harmonic basis
                let coeffs = c.harmonic.adjoint().mul(&self.grams[i])?.mul(&self.coh_maps[i])?;
                let harm = coeffs.adjoint().mul(&coeffs)?;
                let ld_harm = harm.log_det_hpd().map_err(|_| {
                    Error::InvalidComplex(format!("degree {i}: cohomology maps do not project to a basis"))
                })?;
                let ld_h = self.coh_grams[i].log_det_hpd()?;
                let base = Float::with_val(bits, &ld_harm - &ld_h);
                if sign > 0 {
                    acc += base;
                } else {
                    acc -= base;
                }
            }
        }
        Ok(acc / 2u32)
    }

    /// The positive real `τ_σ`.
    pub fn reidemeister(&self) -> Result<Float> {
        Ok(self.log_reidemeister()?.exp())
    }

    /// Reads the per-place JSON form.
    pub fn from_json(v: &Value, prec: Precision) -> Result<Self> {
        let dims = parse_dims(v)?;
        let n = dims.len();
        let diffs = match v.get("differentials") {
            Some(Value::Array(a)) => a
                .iter()
                .enumerate()
                .map(|(i, m)| parse_cmatrix(m, dims.get(i + 1).copied().unwrap_or(0), dims[i], prec))
                .collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
            Some(_) => return Err(Error::Parse("'differentials' must be an array".into())),
        };
        let grams = optional_per_degree(v.get("grams"), n, |i, m| parse_cmatrix(m, dims[i], dims[i], prec), |i| {
            CMatrix::identity(dims[i], prec)
        })?;
        let maps = optional_per_degree(
            v.get("cohomology_maps"),
            n,
            |i, m| parse_cmatrix_rows(m, dims[i], prec),
            |i| CMatrix::zeros(dims[i], 0, prec),
        )?;
        let coh_grams = optional_per_degree(
            v.get("cohomology_grams"),
            n,
            |i, m| parse_cmatrix(m, maps[i].cols(), maps[i].cols(), prec),
            |i| CMatrix::identity(maps[i].cols(), prec),
        )?;
        Self::new(dims, diffs, grams, coh_grams, maps, prec)
    }
}

fn parse_dims(v: &Value) -> Result<Vec<usize>> {
    v.get("dims")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("missing 'dims'".into()))?
        .iter()
        .map(|d| d.as_u64().map(|x| x as usize).ok_or_else(|| Error::Parse("dims must be integers".into())))
        .collect()
}

fn optional_per_degree<T>(
    v: Option<&Value>,
    n: usize,
    parse: impl Fn(usize, &Value) -> Result<T>,
    default: impl Fn(usize) -> T,
) -> Result<Vec<T>> {
    match v {
        None | Some(Value::Null) => Ok((0..n).map(default).collect()),
        Some(Value::Array(a)) if a.len() == n => {
            a.iter().enumerate().map(|(i, m)| if m.is_null() { Ok(default(i)) } else { parse(i, m) }).collect()
        }
        Some(_) => Err(Error::Parse(format!("expected an array of {n} per-degree entries"))),
    }
}

/// Complex scalar from `"p/q"`, a decimal, a JSON number or a `[re, im]` pair.
pub fn json_complex(v: &Value, prec: Precision) -> Result<Complex> {
    match v {
        Value::Array(a) if a.len() == 2 => {
            let re = crate::flatmodel::json_real(&a[0], prec)?;
            let im = crate::flatmodel::json_real(&a[1], prec)?;
            Ok(prec.complex(&re, &im))
        }
        other => Ok(prec.creal(&crate::flatmodel::json_real(other, prec)?)),
    }
}

fn parse_cmatrix_rows(v: &Value, rows: usize, prec: Precision) -> Result<CMatrix> {
    let a = v.as_array().ok_or_else(|| Error::Parse("matrix must be an array of rows".into()))?;
    let cols = a.first().and_then(Value::as_array).map_or(0, Vec::len);
    parse_cmatrix(v, rows, cols, prec)
}

/// Row-major matrix of complex scalars; an empty array stands for any matrix with a zero
/// dimension.
pub fn parse_cmatrix(v: &Value, rows: usize, cols: usize, prec: Precision) -> Result<CMatrix> {
    let a = v.as_array().ok_or_else(|| Error::Parse("matrix must be an array of rows".into()))?;
    if (rows == 0 || cols == 0)
        && a.iter().all(|r| r.as_array().is_some_and(Vec::is_empty)) && (a.is_empty() || a.len() == rows) {
            return Ok(CMatrix::zeros(rows, cols, prec));
        }
    if a.len() != rows {
        return Err(Error::Dimension(format!("expected {rows} rows, got {}", a.len())));
    }
    let mut m = CMatrix::zeros(rows, cols, prec);
    for (r, row) in a.iter().enumerate() {
        let row = row.as_array().ok_or_else(|| Error::Parse("matrix row must be an array".into()))?;
        if row.len() != cols {
            return Err(Error::Dimension(format!("row {r} has {} entries, expected {cols}", row.len())));
        }
        for (c, x) in row.iter().enumerate() {
            m[(r, c)] = json_complex(x, prec)?;
        }
    }
    Ok(m)
}

/// `Σ_σ ln τ_σ · b₁(σ)`.
pub fn rtorsion_form(places: &[MetrizedComplexAtPlace]) -> Result<FormElement> {
    let coeffs = places.iter().map(MetrizedComplexAtPlace::log_reidemeister).collect::<Result<Vec<_>>>()?;
    Ok(FormElement::new(0, coeffs))
}

/// Torsion part of cohomology in a fixed degree, given by a square presentation.
#[derive(Clone, Debug)]
pub struct TorsionCohomology {
    pub degree: usize,
    pub presentation: TorsionPresentation,
}

/// A complex of free `R`-modules `R^{n_0} → R^{n_1} → …` with per-place Grams, a chosen
/// free cohomology basis (cocycle columns over `R`) and optional torsion cohomology.
#[derive(Clone, Debug)]
pub struct MetrizedComplexOverR {
    dims: Vec<usize>,
    differentials: Vec<Vec<Vec<FieldElement>>>,
    /// `grams[i][σ]`.
    grams: Vec<Vec<CMatrix>>,
    /// `coh_grams[i][σ]`.
    coh_grams: Vec<Vec<CMatrix>>,
    coh_maps: Vec<Vec<Vec<FieldElement>>>,
    torsion: Vec<TorsionCohomology>,
}

fn embed_matrix(field: &NumberField, m: &[Vec<FieldElement>], rows: usize, cols: usize, place: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, field.precision(), |r, c| field.embed(&m[r][c], place))
}

impl MetrizedComplexOverR {
    /// `grams`/`coh_grams` default to identities when `None`; `coh_maps` rows are indexed by
    /// the cochain basis, columns by the chosen cohomology classes.
    pub fn new(
        field: &NumberField,
        dims: Vec<usize>,
        differentials: Vec<Vec<Vec<FieldElement>>>,
        grams: Option<Vec<Vec<CMatrix>>>,
        coh_maps: Vec<Vec<Vec<FieldElement>>>,
        coh_grams: Option<Vec<Vec<CMatrix>>>,
        torsion: Vec<TorsionCohomology>,
    ) -> Result<Self> {
        let n = dims.len();
        let s = field.num_places();
        let prec = field.precision();
        if n == 0 || differentials.len() != n - 1 || coh_maps.len() != n {
            return Err(Error::InvalidComplex("inconsistent number of degrees".into()));
        }
        for (i, d) in differentials.iter().enumerate() {
            if d.len() != dims[i + 1] || d.iter().any(|r| r.len() != dims[i]) {
                return Err(Error::InvalidComplex(format!("d_{i} must be {}x{}", dims[i + 1], dims[i])));
            }
        }
        for i in 0..n.saturating_sub(2) {
            for r in 0..dims[i + 2] {
                for c in 0..dims[i] {
                    let mut acc = field.zero();
                    for k in 0..dims[i + 1] {
                        acc = acc.add(&field.mul(&differentials[i + 1][r][k], &differentials[i][k][c]));
                    }
                    if !acc.is_zero() {
                        return Err(Error::InvalidComplex(format!("d_{} d_{i} is not zero", i + 1)));
                    }
                }
            }
        }
        let h: Vec<usize> = coh_maps.iter().map(|m| m.first().map_or(0, Vec::len)).collect();
        for (i, m) in coh_maps.iter().enumerate() {
            let empty = m.is_empty() || h[i] == 0;
            if !empty && (m.len() != dims[i] || m.iter().any(|r| r.len() != h[i])) {
                return Err(Error::InvalidComplex(format!("cohomology map {i} must have {} rows", dims[i])));
            }
        }
        let grams = grams.unwrap_or_else(|| dims.iter().map(|&d| vec![CMatrix::identity(d, prec); s]).collect());
        let coh_grams =
            coh_grams.unwrap_or_else(|| h.iter().map(|&d| vec![CMatrix::identity(d, prec); s]).collect());
        if grams.len() != n || grams.iter().any(|g| g.len() != s) {
            return Err(Error::InvalidComplex(format!("need {s} cochain Grams in each of {n} degrees")));
        }
        if coh_grams.len() != n || coh_grams.iter().any(|g| g.len() != s) {
            return Err(Error::InvalidComplex(format!("need {s} cohomology Grams in each of {n} degrees")));
        }
        for t in &torsion {
            if t.degree >= n {
                return Err(Error::InvalidComplex(format!("torsion cohomology in degree {} out of range", t.degree)));
            }
        }
        Ok(MetrizedComplexOverR { dims, differentials, grams, coh_grams, coh_maps, torsion })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn grams(&self) -> &[Vec<CMatrix>] {
        &self.grams
    }

    pub fn cohomology_grams(&self) -> &[Vec<CMatrix>] {
        &self.coh_grams
    }

    pub fn torsion(&self) -> &[TorsionCohomology] {
        &self.torsion
    }

    fn free_cohomology_dim(&self, i: usize) -> usize {
        self.coh_maps[i].first().map_or(0, Vec::len)
    }

    /// The complex at the place representative `place`.
    pub fn at_place(&self, field: &NumberField, place: usize) -> Result<MetrizedComplexAtPlace> {
        let n = self.dims.len();
        let diffs = (0..n - 1)
            .map(|i| embed_matrix(field, &self.differentials[i], self.dims[i + 1], self.dims[i], place))
            .collect();
        let maps = (0..n)
            .map(|i| embed_matrix(field, &self.coh_maps[i], self.dims[i], self.free_cohomology_dim(i), place))
            .collect();
        MetrizedComplexAtPlace::new(
            self.dims.clone(),
            diffs,
            self.grams.iter().map(|g| g[place].clone()).collect(),
            self.coh_grams.iter().map(|g| g[place].clone()).collect(),
            maps,
            field.precision(),
        )
    }

    pub fn places(&self, field: &NumberField) -> Result<Vec<MetrizedComplexAtPlace>> {
        (0..field.num_places()).map(|p| self.at_place(field, p)).collect()
    }

    /// Reads the R-level JSON form: `dims`, `differentials` (matrices of coefficient
    /// vectors), optional `grams[i][σ]`, `cohomology_maps[i]`, `cohomology_grams[i][σ]` and
    /// `torsion: [{"degree": i, "presentation": ..}]`.
    pub fn from_json(field: &NumberField, v: &Value) -> Result<Self> {
        let prec = field.precision();
        let s = field.num_places();
        let dims = parse_dims(v)?;
        let n = dims.len();
        let elem_matrix = |m: &Value, rows: usize| -> Result<Vec<Vec<FieldElement>>> {
            let a = m.as_array().ok_or_else(|| Error::Parse("matrix must be an array of rows".into()))?;
            if a.len() != rows && !(a.is_empty() && rows == 0) {
                return Err(Error::Dimension(format!("expected {rows} rows, got {}", a.len())));
            }
            a.iter()
                .map(|r| {
                    r.as_array()
                        .ok_or_else(|| Error::Parse("matrix row must be an array".into()))?
                        .iter()
                        .map(|e| parse_field_element(field, e))
                        .collect()
                })
                .collect()
        };
        let diffs = match v.get("differentials") {
            Some(Value::Array(a)) => a
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    let rows = dims.get(i + 1).copied().unwrap_or(0);
                    let mut mat = elem_matrix(m, rows)?;
                    if mat.is_empty() {
                        mat = vec![Vec::new(); rows];
                    }
                    for r in &mut mat {
                        if r.is_empty() {
                            *r = vec![field.zero(); dims[i]];
                        }
                    }
                    Ok(mat)
                })
                .collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
            Some(_) => return Err(Error::Parse("'differentials' must be an array".into())),
        };
        let maps = optional_per_degree(v.get("cohomology_maps"), n, |i, m| elem_matrix(m, dims[i]), |_| Vec::new())?;
        let per_place = |key: &str, size: &dyn Fn(usize) -> usize| -> Result<Option<Vec<Vec<CMatrix>>>> {
            match v.get(key) {
                None | Some(Value::Null) => Ok(None),
                Some(Value::Array(a)) if a.len() == n => a
                    .iter()
                    .enumerate()
                    .map(|(i, per)| match per {
                        Value::Null => Ok(vec![CMatrix::identity(size(i), prec); s]),
                        Value::Array(ms) if ms.len() == s => {
                            ms.iter().map(|m| parse_cmatrix(m, size(i), size(i), prec)).collect()
                        }
                        _ => Err(Error::Parse(format!("'{key}[{i}]' must list one matrix per place"))),
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(Some),
                Some(_) => Err(Error::Parse(format!("'{key}' must have one entry per degree"))),
            }
        };
        let grams = per_place("grams", &|i| dims[i])?;
        let hdims: Vec<usize> = maps.iter().map(|m: &Vec<Vec<FieldElement>>| m.first().map_or(0, Vec::len)).collect();
        let coh_grams = per_place("cohomology_grams", &|i| hdims[i])?;
        let torsion = match v.get("torsion") {
            None | Some(Value::Null) => Vec::new(),
            Some(Value::Array(a)) => a
                .iter()
                .map(|t| {
                    let degree = t
                        .get("degree")
                        .and_then(Value::as_u64)
                        .ok_or_else(|| Error::Parse("torsion entry needs 'degree'".into()))?
                        as usize;
                    let p = t.get("presentation").ok_or_else(|| Error::Parse("torsion entry needs 'presentation'".into()))?;
                    Ok(TorsionCohomology { degree, presentation: TorsionPresentation::from_json(field, p)? })
                })
                .collect::<Result<Vec<_>>>()?,
            Some(_) => return Err(Error::Parse("'torsion' must be an array".into())),
        };
        Self::new(field, dims, diffs, grams, maps, coh_grams, torsion)
    }
}

fn parse_field_element(field: &NumberField, v: &Value) -> Result<FieldElement> {
    let strs: Vec<String> = match v {
        Value::Array(a) => a
            .iter()
            .map(|x| match x {
                Value::String(s) => Ok(s.clone()),
                Value::Number(n) => Ok(n.to_string()),
                other => Err(Error::Parse(format!("expected a rational, got {other}"))),
            })
            .collect::<Result<_>>()?,
        Value::String(s) => vec![s.clone()],
        Value::Number(n) => vec![n.to_string()],
        other => return Err(Error::Parse(format!("expected a field element, got {other}"))),
    };
    field.parse_element(&strs)
}

/// Both sides of the Euler-characteristic identity at a point.
#[derive(Clone, Debug)]
pub struct EulerReport {
    /// `Σ(-1)^i cycl(V^i) - Σ(-1)^i cycl(H^i) - a(2 ln τ)`.
    pub residual: PointClass,
    /// The same with `a(½ ln τ)` in place of `a(2 ln τ)`.
    pub residual_half: PointClass,
    pub log_tau: FormElement,
    pub residual_is_zero: bool,
    pub residual_half_is_zero: bool,
}

fn signed(ctx: &KContext, acc: PointClass, x: &PointClass, degree: usize) -> Result<PointClass> {
    if degree.is_multiple_of(2) {
        ctx.class_add(&acc, x)
    } else {
        ctx.class_sub(&acc, x)
    }
}

/// `Σ(-1)^i cycl(V^i) - Σ(-1)^i cycl(H^i)` with torsion cohomology folded in through `Ẑ`.
fn euler_difference(ctx: &KContext, field: &NumberField, cplx: &MetrizedComplexOverR) -> Result<PointClass> {
    let mut acc = ctx.zero();
    for i in 0..cplx.dims.len() {
        let v = ctx.cycl_free(&cplx.grams[i])?;
        acc = signed(ctx, acc, &v, i)?;
        let h = ctx.cycl_free(&cplx.coh_grams[i])?;
        acc = signed(ctx, acc, &ctx.class_neg(&h)?, i)?;
    }
    for t in &cplx.torsion {
        let z = zhat(ctx, field, &t.presentation)?;
        acc = signed(ctx, acc, &ctx.class_neg(&z)?, t.degree)?;
    }
    Ok(acc)
}

pub fn euler_identity_report(ctx: &KContext, field: &NumberField, cplx: &MetrizedComplexOverR) -> Result<EulerReport> {
    let diff = euler_difference(ctx, field, cplx)?;
    let log_tau = rtorsion_form(&cplx.places(field)?)?;
    let prec = field.precision();
    let two = ctx.a_map(&log_tau.scale(&prec.int(2)))?;
    let half = ctx.a_map(&log_tau.scale(&(prec.one() / 2u32)))?;
    let residual = ctx.class_sub(&diff, &two)?;
    let residual_half = ctx.class_sub(&diff, &half)?;
    Ok(EulerReport {
        residual_is_zero: ctx.is_zero(&residual),
        residual_half_is_zero: ctx.is_zero(&residual_half),
        residual,
        residual_half,
        log_tau,
    })
}

/// The residual class of the identity `Σ(-1)^i cycl(V^i) = Σ(-1)^i cycl(H^i) + a(2 ln τ)`.
pub fn verify_euler_identity(ctx: &KContext, field: &NumberField, cplx: &MetrizedComplexOverR) -> Result<PointClass> {
    Ok(euler_identity_report(ctx, field, cplx)?.residual)
}
