use std::collections::HashMap;
use std::io::Write;
use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::{dot3, BasisFunction, BasisSpec, Parity, WaveVector};

/// Sparse `a_{i,m,k} = ∫(w_i·∇w_m)·w_k dx`, stored row-wise by the output
/// index `k`. Within a row entries are sorted by `(i, m)`.
#[derive(Clone, Debug)]
pub struct TrilinearTensor {
    n: usize,
    row_ptr: Vec<usize>,
    idx_i: Vec<u32>,
    idx_m: Vec<u32>,
    vals: Vec<f64>,
}

/// Exponent `e` with `α = c·i^e` for the coefficient of `w` at `sign·k`.
#[inline]
fn phase(f: &BasisFunction, sign: i32) -> u32 {
    match (f.parity, sign > 0) {
        (Parity::Cos, _) => 0,
        (Parity::Sin, true) => 3,
        (Parity::Sin, false) => 1,
    }
}

const RE_I_POW: [f64; 4] = [1.0, 0.0, -1.0, 0.0];

pub(crate) fn rep_ranges(basis: &BasisSpec) -> HashMap<WaveVector, Range<usize>> {
    let mut out: HashMap<WaveVector, Range<usize>> = HashMap::new();
    for (j, f) in basis.functions().iter().enumerate() {
        out.entry(f.k).and_modify(|r| r.end = j + 1).or_insert(j..j + 1);
    }
    out
}

impl TrilinearTensor {
    /// Closed-form assembly over all resonant triads `k_i ± k_m ± k_k = 0`.
    ///
    /// Writing `w = Σ_± α(±) ε e^{±iκ·x}`, the integral of three exponentials
    /// is `L³` on resonant sign choices, and the two mirror-image choices are
    /// complex conjugates. Fixing the sign of `w_i` to `+` therefore gives
    /// `a = 2 L³ Re[α_i α_m α_k · i s_m (ε_i·κ_m)] (ε_m·ε_k)`.
    pub fn assemble(basis: &BasisSpec) -> Self {
        let n = basis.len();
        let torus = *basis.torus();
        let funcs = basis.functions();
        let ranges = rep_ranges(basis);
        let reps = basis.reps();
        let coef = 1.0 / (std::f64::consts::SQRT_2 * torus.period().powf(1.5));

        let blocks: Vec<Vec<Vec<(u32, u32, f64)>>> = reps
            .par_iter()
            .map(|&rk| {
                let kr = ranges[&rk].clone();
                let mut rows: Vec<Vec<(u32, u32, f64)>> = vec![Vec::new(); kr.len()];
                for sk in [1, -1] {
                    let r = WaveVector::new(sk * rk.0[0], sk * rk.0[1], sk * rk.0[2]);
                    for &rp in &reps {
                        // k_i + q + r = 0 with k_i = rp taken with sign +.
                        let q = -(rp + r);
                        if q.is_zero() {
                            continue;
                        }
                        let (rq, sq) = q.canonical();
                        let Some(mr) = ranges.get(&rq) else { continue };
                        let kq = torus.kappa(rq);
                        for i in ranges[&rp].clone() {
                            let fi = &funcs[i];
                            let eik = dot3(&fi.eps, &kq);
                            if eik == 0.0 {
                                continue;
                            }
                            for m in mr.clone() {
                                let fm = &funcs[m];
                                for (row, k) in kr.clone().enumerate() {
                                    let fk = &funcs[k];
                                    let e = phase(fi, 1) + phase(fm, sq) + phase(fk, sk) + 1;
                                    let re = RE_I_POW[(e % 4) as usize];
                                    if re == 0.0 {
                                        continue;
                                    }
                                    let v = sq as f64 * re * eik * dot3(&fm.eps, &fk.eps) * coef;
                                    if v != 0.0 {
                                        rows[row].push((i as u32, m as u32, v));
                                    }
                                }
                            }
                        }
                    }
                }
                for r in rows.iter_mut() {
                    r.sort_by_key(|&(i, m, _)| (i, m));
                }
                rows
            })
            .collect();

        let nnz: usize = blocks.iter().flatten().map(Vec::len).sum();
        let mut t = Self {
            n,
            row_ptr: Vec::with_capacity(n + 1),
            idx_i: Vec::with_capacity(nnz),
            idx_m: Vec::with_capacity(nnz),
            vals: Vec::with_capacity(nnz),
        };
        t.row_ptr.push(0);
        for row in blocks.into_iter().flatten() {
            for (i, m, v) in row {
                t.idx_i.push(i);
                t.idx_m.push(m);
                t.vals.push(v);
            }
            t.row_ptr.push(t.vals.len());
        }
        debug_assert_eq!(t.row_ptr.len(), n + 1);
        t
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `a_{i,m,k}`, zero when absent.
    pub fn get(&self, i: usize, m: usize, k: usize) -> f64 {
        let r = self.row_ptr[k]..self.row_ptr[k + 1];
        let key = (i as u32, m as u32);
        let ii = &self.idx_i[r.clone()];
        let mm = &self.idx_m[r.clone()];
        let (mut lo, mut hi) = (0usize, ii.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match (ii[mid], mm[mid]).cmp(&key) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return self.vals[r.start + mid],
            }
        }
        0.0
    }

    /// Iterate `(i, m, k, a_{imk})` over stored entries.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |k| {
            (self.row_ptr[k]..self.row_ptr[k + 1])
                .map(move |e| (self.idx_i[e] as usize, self.idx_m[e] as usize, k, self.vals[e]))
        })
    }

    fn check_len(&self, g: &[f64]) -> Result<()> {
        if g.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: g.len(),
            });
        }
        Ok(())
    }

    /// `out_k = Σ_{i,m} a_{imk} g_i h_m`.
    pub fn contract_into(&self, g: &[f64], h: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_len(g)?;
        self.check_len(h)?;
        self.check_len(out)?;
        let body = |(k, o): (usize, &mut f64)| {
            let mut s = 0.0;
            for e in self.row_ptr[k]..self.row_ptr[k + 1] {
                s += self.vals[e] * g[self.idx_i[e] as usize] * h[self.idx_m[e] as usize];
            }
            *o = s;
        };
        if self.nnz() > 20_000 {
            out.par_iter_mut().enumerate().for_each(body);
        } else {
            out.iter_mut().enumerate().for_each(body);
        }
        Ok(())
    }

    pub fn contract(&self, g: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n];
        self.contract_into(g, g, &mut out)?;
        Ok(out)
    }

    /// `Σ a_{imk} g_i g_m g_k` together with `Σ |a_{imk} g_i g_m g_k|`, the
    /// natural scale for judging cancellation.
    pub fn cubic_form(&self, g: &[f64]) -> Result<(f64, f64)> {
        let c = self.contract(g)?;
        let mut s = 0.0;
        let mut scale = 0.0;
        for k in 0..self.n {
            s += c[k] * g[k];
            for e in self.row_ptr[k]..self.row_ptr[k + 1] {
                scale += (self.vals[e] * g[self.idx_i[e] as usize] * g[self.idx_m[e] as usize] * g[k]).abs();
            }
        }
        Ok((s, scale))
    }

    /// `max |a_{imk} + a_{ikm}|` over stored entries (absent partners count
    /// as zero), and the largest entry magnitude.
    pub fn skew_defect(&self) -> (f64, f64) {
        (0..self.n)
            .into_par_iter()
            .map(|k| {
                let mut d = 0.0f64;
                let mut big = 0.0f64;
                for e in self.row_ptr[k]..self.row_ptr[k + 1] {
                    let (i, m, v) = (self.idx_i[e] as usize, self.idx_m[e] as usize, self.vals[e]);
                    d = d.max((v + self.get(i, k, m)).abs());
                    big = big.max(v.abs());
                }
                (d, big)
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)))
    }

    /// Number of stored entries whose wavevectors admit no resonant signs.
    pub fn momentum_violations(&self, basis: &BasisSpec) -> usize {
        let f = basis.functions();
        self.entries()
            .filter(|&(i, m, k, _)| {
                let (a, b, c) = (f[i].k, f[m].k, f[k].k);
                ![(1, 1), (1, -1), (-1, 1), (-1, -1)].iter().any(|&(sb, sc)| {
                    (0..3).all(|d| a.0[d] + sb * b.0[d] + sc * c.0[d] == 0)
                })
            })
            .count()
    }

    /// Fault injection for audit tooling: add `delta` to stored entry `e`.
    pub fn perturb_entry(&mut self, e: usize, delta: f64) {
        self.vals[e] += delta;
    }

    /// CSV with columns `i,m,k,value`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["i", "m", "k", "value"])?;
        for (i, m, k, v) in self.entries() {
            wr.write_record(&[i.to_string(), m.to_string(), k.to_string(), format!("{v:.17e}")])?;
        }
        wr.flush()?;
        Ok(())
    }
}
