//! Polynomial component functions, used for custom specs and for the
//! randomized test catalog.

use serde::{Deserialize, Serialize};

use crate::geom::{Domain, GeomError, MetricField};
use crate::jet::Jet3;
use crate::kk::{FrameField, GaugeField};
use crate::rng::XorShift64Star;

/// One monomial `coeff · Π x_k^{powers[k]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub coeff: f64,
    pub powers: Vec<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    pub terms: Vec<Term>,
}

impl Polynomial {
    pub fn constant(c: f64, vars: usize) -> Polynomial {
        Polynomial {
            terms: vec![Term {
                coeff: c,
                powers: vec![0; vars],
            }],
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.powers.iter().sum()).max().unwrap_or(0)
    }

    /// Every monomial of total degree `≤ degree` with a coefficient drawn
    /// uniformly from `[−scale, scale]`, in graded lexicographic order.
    pub fn random(vars: usize, degree: u32, scale: f64, rng: &mut XorShift64Star) -> Polynomial {
        let terms = monomials(vars, degree)
            .into_iter()
            .map(|powers| Term {
                coeff: rng.uniform(-scale, scale),
                powers,
            })
            .collect();
        Polynomial { terms }
    }

    /// Upper bound of `|p|` on the cube `|x_k| ≤ half_width`.
    pub fn bound_on_cube(&self, half_width: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff.abs() * half_width.powi(t.powers.iter().sum::<u32>() as i32))
            .sum()
    }

    pub fn check_vars(&self, vars: usize) -> Result<(), GeomError> {
        match self.terms.iter().find(|t| t.powers.len() != vars) {
            Some(t) => Err(GeomError::InvalidParameter(format!(
                "monomial with {} exponents in a {vars}-variable polynomial",
                t.powers.len()
            ))),
            None => Ok(()),
        }
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.coeff
                    * t.powers
                        .iter()
                        .zip(x)
                        .map(|(&p, &v)| v.powi(p as i32))
                        .product::<f64>()
            })
            .sum()
    }

    /// Evaluates on coordinate jets using precomputed powers.
    pub fn eval(&self, powers: &Powers) -> Jet3 {
        let mut acc = powers.zero.clone();
        for t in &self.terms {
            let mut m: Option<Jet3> = None;
            for (k, &p) in t.powers.iter().enumerate() {
                if p == 0 {
                    continue;
                }
                let f = powers.get(k, p);
                m = Some(match m {
                    None => f.clone(),
                    Some(prev) => &prev * f,
                });
            }
            match m {
                None => acc = acc + t.coeff,
                Some(m) => acc = acc + m.scale(t.coeff),
            }
        }
        acc
    }
}

/// Cached powers `x_k^p` of coordinate jets.
pub struct Powers {
    zero: Jet3,
    table: Vec<Vec<Jet3>>,
}

impl Powers {
    pub fn new(x: &[Jet3], max_degree: u32) -> Powers {
        let table = x
            .iter()
            .map(|xk| {
                let mut row = vec![xk.constant_like(1.0)];
                for p in 1..=max_degree as usize {
                    let next = &row[p - 1] * xk;
                    row.push(next);
                }
                row
            })
            .collect();
        Powers {
            zero: x[0].zero_like(),
            table,
        }
    }

    fn get(&self, k: usize, p: u32) -> &Jet3 {
        &self.table[k][p as usize]
    }
}

/// Exponent vectors of total degree `≤ degree`, graded lexicographic.
pub fn monomials(vars: usize, degree: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for total in 0..=degree {
        let mut cur = vec![0u32; vars];
        fill(&mut out, &mut cur, 0, total);
    }
    out
}

fn fill(out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>, k: usize, left: u32) {
    if k + 1 == cur.len() {
        cur[k] = left;
        out.push(cur.clone());
        return;
    }
    for p in (0..=left).rev() {
        cur[k] = p;
        fill(out, cur, k + 1, left - p);
    }
    cur[k] = 0;
}

fn max_degree<'a>(ps: impl IntoIterator<Item = &'a Polynomial>) -> u32 {
    ps.into_iter().map(|p| p.degree()).max().unwrap_or(0)
}

/// Metric with polynomial components; only the upper triangle is stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyMetric {
    pub dim: usize,
    /// Row-major upper triangle `(i ≤ j)`.
    pub upper: Vec<Polynomial>,
    pub domain: Domain,
}

impl PolyMetric {
    pub fn new(dim: usize, upper: Vec<Polynomial>, domain: Domain) -> Result<PolyMetric, GeomError> {
        if upper.len() != dim * (dim + 1) / 2 {
            return Err(GeomError::InvalidParameter(format!(
                "{} upper-triangle entries for dimension {dim}",
                upper.len()
            )));
        }
        for p in &upper {
            p.check_vars(dim)?;
        }
        if domain.dim() != dim {
            return Err(GeomError::InvalidParameter("domain dimension mismatch".into()));
        }
        Ok(PolyMetric { dim, upper, domain })
    }

    /// From a full square matrix of polynomials; the lower triangle must
    /// mirror the upper one.
    pub fn from_matrix(dim: usize, full: Vec<Vec<Polynomial>>, domain: Domain) -> Result<PolyMetric, GeomError> {
        if full.len() != dim || full.iter().any(|r| r.len() != dim) {
            return Err(GeomError::InvalidParameter(format!("metric matrix is not {dim}×{dim}")));
        }
        for i in 0..dim {
            for j in 0..i {
                if full[i][j] != full[j][i] {
                    return Err(GeomError::InvalidParameter(format!(
                        "metric entries ({i},{j}) and ({j},{i}) differ"
                    )));
                }
            }
        }
        let upper = (0..dim)
            .flat_map(|i| (i..dim).map(move |j| (i, j)))
            .map(|(i, j)| full[i][j].clone())
            .collect();
        PolyMetric::new(dim, upper, domain)
    }

    /// `δ + eps·P` on the cube `[−half_width, half_width]^dim`, where `P` is a
    /// random symmetric matrix of polynomials of degree `≤ degree` normalized
    /// so that its largest Gershgorin row bound on the cube is 1. For
    /// `eps < 1` the metric is therefore positive definite on the whole cube.
    pub fn random_perturbation(
        dim: usize,
        degree: u32,
        eps: f64,
        half_width: f64,
        rng: &mut XorShift64Star,
    ) -> PolyMetric {
        let mut upper: Vec<Polynomial> = (0..dim * (dim + 1) / 2)
            .map(|_| Polynomial::random(dim, degree, 1.0, rng))
            .collect();
        let bound = PolyMetric::new(dim, upper.clone(), Domain::cube(dim, half_width))
            .expect("shape")
            .row_bound(half_width);
        let s = eps / bound.max(f64::MIN_POSITIVE);
        let mut k = 0;
        for i in 0..dim {
            for j in i..dim {
                let p = &mut upper[k];
                for t in &mut p.terms {
                    t.coeff *= s;
                }
                if i == j {
                    p.terms[0].coeff += 1.0;
                }
                k += 1;
            }
        }
        PolyMetric::new(dim, upper, Domain::cube(dim, half_width)).expect("shape")
    }

    /// `max_i Σ_j sup|g_ij|` over the cube.
    fn row_bound(&self, half_width: f64) -> f64 {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.entry(i, j).bound_on_cube(half_width)).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn entry(&self, i: usize, j: usize) -> &Polynomial {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        &self.upper[i * self.dim - i * (i + 1) / 2 + j]
    }
}

impl MetricField for PolyMetric {
    fn dim(&self) -> usize {
        self.dim
    }
    fn components(&self, x: &[Jet3]) -> Result<Vec<Jet3>, GeomError> {
        let pw = Powers::new(&x[..self.dim], max_degree(&self.upper));
        let upper: Vec<Jet3> = self.upper.iter().map(|p| p.eval(&pw)).collect();
        let n = self.dim;
        Ok((0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                let (i, j) = if i <= j { (i, j) } else { (j, i) };
                upper[i * n - i * (i + 1) / 2 + j].clone()
            })
            .collect())
    }
    fn domain(&self) -> Domain {
        self.domain.clone()
    }
}

/// Vector fields with polynomial components, `[𝖺][i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyFrame {
    pub dim: usize,
    pub fields: Vec<Vec<Polynomial>>,
}

impl FrameField for PolyFrame {
    fn count(&self) -> usize {
        self.fields.len()
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn components(&self, y: &[Jet3]) -> Result<Vec<Jet3>, GeomError> {
        let pw = Powers::new(&y[..self.dim], max_degree(self.fields.iter().flatten()));
        Ok(self.fields.iter().flatten().map(|p| p.eval(&pw)).collect())
    }
}

/// Gauge potential with polynomial components, `[𝖺][μ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyGauge {
    pub dim: usize,
    pub fields: Vec<Vec<Polynomial>>,
}

impl PolyGauge {
    pub fn random(count: usize, dim: usize, degree: u32, scale: f64, rng: &mut XorShift64Star) -> PolyGauge {
        PolyGauge {
            dim,
            fields: (0..count)
                .map(|_| (0..dim).map(|_| Polynomial::random(dim, degree, scale, rng)).collect())
                .collect(),
        }
    }
}

impl GaugeField for PolyGauge {
    fn count(&self) -> usize {
        self.fields.len()
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn components(&self, x: &[Jet3]) -> Result<Vec<Jet3>, GeomError> {
        let pw = Powers::new(&x[..self.dim], max_degree(self.fields.iter().flatten()));
        Ok(self.fields.iter().flatten().map(|p| p.eval(&pw)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_count() {
        assert_eq!(monomials(3, 3).len(), 20);
        assert_eq!(monomials(4, 2).len(), 15);
        assert_eq!(monomials(2, 1), vec![vec![0, 0], vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn jet_evaluation_matches_f64() {
        let mut rng = XorShift64Star::new(3);
        let p = Polynomial::random(3, 3, 1.0, &mut rng);
        let x = [0.3, -0.2, 0.5];
        let jets = Jet3::seed_point(&x).unwrap();
        let v = p.eval(&Powers::new(&jets, 3));
        assert!((v.value() - p.eval_f64(&x)).abs() < 1e-14);
    }

    #[test]
    fn random_metric_is_positive_definite() {
        let mut rng = XorShift64Star::new(11);
        let m = PolyMetric::random_perturbation(5, 2, 0.05, 0.5, &mut rng);
        let p = m.domain.sample(&mut rng);
        let g: Vec<f64> = m
            .components(&Jet3::seed_point(&p).unwrap())
            .unwrap()
            .iter()
            .map(|j| j.value())
            .collect();
        let ev = crate::tensor::linalg::symmetric_eigenvalues(5, &g);
        assert!(ev[0] > 0.0);
    }
}
