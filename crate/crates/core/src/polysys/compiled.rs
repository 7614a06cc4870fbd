//! Floating-point images of exact polynomials for repeated evaluation.

use nalgebra::DMatrix;

use super::poly::Polynomial;
use crate::C64;

/// Table of integer powers `x_i^k` for `k` in `[lo_i, hi_i]`.
#[derive(Clone, Debug)]
pub struct Powers {
    lo: Vec<i32>,
    table: Vec<Vec<C64>>,
}

impl Powers {
    pub fn new(point: &[C64], lo: &[i32], hi: &[i32]) -> Self {
        let table = point
            .iter()
            .enumerate()
            .map(|(i, &z)| {
                let n = (hi[i] - lo[i] + 1).max(1) as usize;
                let mut row = Vec::with_capacity(n);
                let mut cur = if lo[i] < 0 { (C64::new(1.0, 0.0) / z).powi(-lo[i]) } else { z.powi(lo[i]) };
                for _ in 0..n {
                    row.push(cur);
                    cur *= z;
                }
                row
            })
            .collect();
        Powers { lo: lo.to_vec(), table }
    }

    #[inline]
    fn get(&self, i: usize, k: i32) -> C64 {
        self.table[i][(k - self.lo[i]) as usize]
    }
}

#[derive(Clone, Debug)]
pub struct CompiledPoly {
    terms: Vec<(Vec<i32>, C64)>,
}

impl CompiledPoly {
    pub fn new(p: &Polynomial) -> Self {
        CompiledPoly {
            terms: p.terms().map(|(e, c)| (e.clone(), c.to_complex())).collect(),
        }
    }

    pub fn eval(&self, pw: &Powers) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut t = *c;
            for (i, &k) in e.iter().enumerate() {
                if k != 0 {
                    t *= pw.get(i, k);
                }
            }
            acc += t;
        }
        acc
    }

    /// Sum of absolute term values; the natural scale of round-off.
    pub fn eval_abs(&self, pw: &Powers) -> f64 {
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut t = c.norm();
            for (i, &k) in e.iter().enumerate() {
                if k != 0 {
                    t *= pw.get(i, k).norm();
                }
            }
            acc += t;
        }
        acc
    }

    fn bounds(&self, lo: &mut [i32], hi: &mut [i32]) {
        for (e, _) in &self.terms {
            for (i, &k) in e.iter().enumerate() {
                lo[i] = lo[i].min(k);
                hi[i] = hi[i].max(k);
            }
        }
    }
}

/// A list of polynomials with their symbolic gradients, ready for Newton.
#[derive(Clone, Debug)]
pub struct CompiledSystem {
    nvars: usize,
    values: Vec<CompiledPoly>,
    gradients: Vec<Vec<CompiledPoly>>,
    lo: Vec<i32>,
    hi: Vec<i32>,
}

impl CompiledSystem {
    pub fn new(polys: &[Polynomial], nvars: usize) -> Self {
        let values: Vec<CompiledPoly> = polys.iter().map(CompiledPoly::new).collect();
        let gradients: Vec<Vec<CompiledPoly>> = polys
            .iter()
            .map(|p| (0..nvars).map(|i| CompiledPoly::new(&p.diff_index(i))).collect())
            .collect();
        let mut lo = vec![0; nvars];
        let mut hi = vec![0; nvars];
        for v in &values {
            v.bounds(&mut lo, &mut hi);
        }
        for g in gradients.iter().flatten() {
            g.bounds(&mut lo, &mut hi);
        }
        CompiledSystem {
            nvars,
            values,
            gradients,
            lo,
            hi,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn powers(&self, x: &[C64]) -> Powers {
        Powers::new(x, &self.lo, &self.hi)
    }

    pub fn eval(&self, x: &[C64]) -> Vec<C64> {
        let pw = self.powers(x);
        self.values.iter().map(|p| p.eval(&pw)).collect()
    }

    pub fn jacobian(&self, x: &[C64]) -> DMatrix<C64> {
        let pw = self.powers(x);
        DMatrix::from_fn(self.values.len(), self.nvars, |r, c| self.gradients[r][c].eval(&pw))
    }

    /// Largest `|f_r| / max(1, sum_r |terms|)`.
    pub fn scaled_residual(&self, x: &[C64]) -> f64 {
        let pw = self.powers(x);
        self.values
            .iter()
            .map(|p| p.eval(&pw).norm() / p.eval_abs(&pw).max(1.0))
            .fold(0.0, f64::max)
    }

    /// Values, Jacobian and per-row term scales `max(1, sum |terms|)`.
    pub fn eval_scaled(&self, x: &[C64]) -> (Vec<C64>, DMatrix<C64>, Vec<f64>) {
        let pw = self.powers(x);
        let f = self.values.iter().map(|p| p.eval(&pw)).collect();
        let j = DMatrix::from_fn(self.values.len(), self.nvars, |r, c| self.gradients[r][c].eval(&pw));
        let scale = self.values.iter().map(|p| p.eval_abs(&pw).max(1.0)).collect();
        (f, j, scale)
    }

    pub fn eval_with_jacobian(&self, x: &[C64]) -> (Vec<C64>, DMatrix<C64>) {
        let pw = self.powers(x);
        let f = self.values.iter().map(|p| p.eval(&pw)).collect();
        let j = DMatrix::from_fn(self.values.len(), self.nvars, |r, c| self.gradients[r][c].eval(&pw));
        (f, j)
    }
}
