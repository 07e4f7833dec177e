//! Dense matrices over F_q and F_{q^s}.
//!
//! Rank, inversion and kernels are computed by Gaussian elimination on
//! the F_q entries. Over F_2 the elimination runs on rows packed into
//! 64-bit words.
//!
//! Serialized form: rows (u64 LE), cols (u64 LE), then the row-major
//! entries as one little-endian bit stream (`b` bits per F_q entry,
//! `s * b` bits per F_{q^s} entry), zero-padded to a whole byte.

use std::collections::HashMap;

use bitvec::prelude::*;
use rand::Rng;

use crate::error::{dim_err, Error, Result};
use crate::gf::{BaseField, BasisGamma, FieldTower, Fq, FqsElem};

/// Result of an elimination: rank plus the number of F_q
/// multiply-accumulate steps spent on row operations, counted densely
/// (every row below a pivot costs one pass over the row width, whether
/// or not its factor is zero).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RankInfo {
    pub rank: usize,
    pub ops: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatFq {
    field: BaseField,
    rows: usize,
    cols: usize,
    data: Vec<Fq>,
}

impl MatFq {
    pub fn zeros(field: &BaseField, rows: usize, cols: usize) -> Self {
        Self {
            field: field.clone(),
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(field: &BaseField, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    pub fn from_vec(field: &BaseField, rows: usize, cols: usize, data: Vec<Fq>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(dim_err(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|&c| c as usize >= field.order()) {
            return Err(Error::Format("entry outside F_q".into()));
        }
        Ok(Self {
            field: field.clone(),
            rows,
            cols,
            data,
        })
    }

    pub fn from_rows(field: &BaseField, rows: &[Vec<Fq>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(dim_err("ragged rows"));
        }
        Self::from_vec(field, rows.len(), cols, rows.concat())
    }

    pub fn random<R: Rng + ?Sized>(field: &BaseField, rows: usize, cols: usize, rng: &mut R) -> Self {
        Self {
            field: field.clone(),
            rows,
            cols,
            data: (0..rows * cols).map(|_| field.random(rng)).collect(),
        }
    }

    /// Uniform invertible matrix by rejection sampling.
    pub fn random_invertible<R: Rng + ?Sized>(field: &BaseField, n: usize, rng: &mut R) -> Self {
        loop {
            let m = Self::random(field, n, n, rng);
            if m.rank() == n {
                return m;
            }
        }
    }

    pub fn field(&self) -> &BaseField {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Fq] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Fq {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Fq) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Fq] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [Fq] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&c| c == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(&self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(dim_err(format!(
                "add {}x{} + {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = self.clone();
        out.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a ^= b);
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(dim_err(format!(
                "mul {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = &self.field;
        let mut out = Self::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a == 0 {
                    continue;
                }
                let src = other.row(l);
                let dst = out.row_mut(i);
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d ^= f.mul(a, b);
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: Fq) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|x| *x = self.field.mul(c, *x));
        out
    }

    /// `out = self * x` for a column vector `x`.
    pub fn mul_vec_into(&self, x: &[Fq], out: &mut [Fq]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (r, o) in out.iter_mut().enumerate() {
            *o = self
                .row(r)
                .iter()
                .zip(x)
                .fold(0, |acc, (&a, &b)| acc ^ self.field.mul(a, b));
        }
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &r in idx {
            data.extend_from_slice(self.row(r));
        }
        Self {
            field: self.field.clone(),
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn select_cols(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.rows);
        for r in 0..self.rows {
            data.extend(idx.iter().map(|&c| self.get(r, c)));
        }
        Self {
            field: self.field.clone(),
            rows: self.rows,
            cols: idx.len(),
            data,
        }
    }

    pub fn vstack(parts: &[&Self]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| dim_err("empty stack"))?;
        if parts.iter().any(|p| p.cols != first.cols) {
            return Err(dim_err("vstack column mismatch"));
        }
        let mut data = Vec::new();
        for p in parts {
            data.extend_from_slice(&p.data);
        }
        Ok(Self {
            field: first.field.clone(),
            rows: parts.iter().map(|p| p.rows).sum(),
            cols: first.cols,
            data,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank_info().rank
    }

    /// Rank by forward elimination, with an operation count.
    pub fn rank_info(&self) -> RankInfo {
        if self.field.bits() == 1 {
            rank_f2(self)
        } else {
            let mut work = self.data.clone();
            let (rank, _, ops) = eliminate(&self.field, &mut work, self.rows, self.cols, false);
            RankInfo { rank, ops }
        }
    }

    pub fn invert(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(dim_err("inverse of a non-square matrix"));
        }
        let n = self.rows;
        let w = 2 * n;
        let mut work = vec![0; n * w];
        for r in 0..n {
            work[r * w..r * w + n].copy_from_slice(self.row(r));
            work[r * w + n + r] = 1;
        }
        let (rank, pivots, _) = eliminate_cols(&self.field, &mut work, n, w, n, true);
        if rank < n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
            return Err(Error::Singular);
        }
        let mut out = Self::zeros(&self.field, n, n);
        for r in 0..n {
            out.row_mut(r).copy_from_slice(&work[r * w + n..(r + 1) * w]);
        }
        Ok(out)
    }

    /// Basis of the right kernel {x : self * x = 0}, one vector per row.
    pub fn kernel(&self) -> Self {
        let mut work = self.data.clone();
        let (rank, pivots, _) = eliminate(&self.field, &mut work, self.rows, self.cols, true);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = Self::zeros(&self.field, free.len(), self.cols);
        for (k, &fc) in free.iter().enumerate() {
            out.set(k, fc, 1);
            for (r, &pc) in pivots.iter().enumerate().take(rank) {
                // char 2: -a = a
                out.set(k, pc, work[r * self.cols + fc]);
            }
        }
        out
    }

    pub fn payload_bits(&self) -> u64 {
        (self.rows * self.cols) as u64 * self.field.bits() as u64
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = header_bytes(self.rows, self.cols);
        out.extend(pack(&self.data, self.field.bits() as usize));
        out
    }

    /// Parses one matrix from the front of `bytes`, returning it together
    /// with the number of bytes consumed.
    pub fn from_bytes(field: &BaseField, bytes: &[u8]) -> Result<(Self, usize)> {
        let (rows, cols) = read_header(bytes)?;
        let count = rows.checked_mul(cols).ok_or_else(|| Error::Format("dimension overflow".into()))?;
        let (data, used) = unpack(&bytes[16..], count, field.bits() as usize)?;
        Ok((Self::from_vec(field, rows, cols, data)?, 16 + used))
    }
}

/// Row reduction over all columns; see [`eliminate_cols`].
fn eliminate(
    f: &BaseField,
    a: &mut [Fq],
    rows: usize,
    cols: usize,
    full: bool,
) -> (usize, Vec<usize>, u64) {
    eliminate_cols(f, a, rows, cols, cols, full)
}

/// Gaussian elimination on a row-major `rows x width` array, choosing
/// pivots among the first `pivot_cols` columns. With `full` the result is
/// reduced row echelon form with unit pivots; otherwise rows below each
/// pivot are cleared only. Each row operation costs `width` MACs.
fn eliminate_cols(
    f: &BaseField,
    a: &mut [Fq],
    rows: usize,
    width: usize,
    pivot_cols: usize,
    full: bool,
) -> (usize, Vec<usize>, u64) {
    let mut rank = 0;
    let mut pivots = Vec::new();
    let mut ops = 0u64;
    let mut pivot_row = vec![0 as Fq; width];
    for col in 0..pivot_cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| a[r * width + col] != 0) else {
            continue;
        };
        if p != rank {
            for c in 0..width {
                a.swap(p * width + c, rank * width + c);
            }
        }
        let inv = f.inv(a[rank * width + col]).expect("pivot is nonzero");
        if inv != 1 {
            for c in 0..width {
                a[rank * width + c] = f.mul(inv, a[rank * width + c]);
            }
            ops += width as u64;
        }
        pivot_row.copy_from_slice(&a[rank * width..(rank + 1) * width]);
        let targets = if full { 0..rows } else { rank + 1..rows };
        ops += ((targets.len() - usize::from(full)) * width) as u64;
        for r in targets {
            if r == rank {
                continue;
            }
            let factor = a[r * width + col];
            if factor == 0 {
                continue;
            }
            let row = &mut a[r * width..(r + 1) * width];
            for (x, &y) in row.iter_mut().zip(&pivot_row) {
                *x ^= f.mul(factor, y);
            }
        }
        pivots.push(col);
        rank += 1;
    }
    (rank, pivots, ops)
}

fn rank_f2(m: &MatFq) -> RankInfo {
    let words = m.cols.div_ceil(64);
    let mut rows: Vec<Vec<u64>> = (0..m.rows)
        .map(|r| {
            let mut w = vec![0u64; words];
            for (c, &x) in m.row(r).iter().enumerate() {
                if x != 0 {
                    w[c / 64] |= 1 << (c % 64);
                }
            }
            w
        })
        .collect();
    let mut rank = 0;
    let mut ops = 0u64;
    for col in 0..m.cols {
        if rank == rows.len() {
            break;
        }
        let (wi, bit) = (col / 64, 1u64 << (col % 64));
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][wi] & bit != 0) else {
            continue;
        };
        rows.swap(p, rank);
        let (head, tail) = rows.split_at_mut(rank + 1);
        let pivot = &head[rank];
        for row in tail.iter_mut() {
            if row[wi] & bit != 0 {
                row.iter_mut().zip(pivot).for_each(|(x, y)| *x ^= y);
            }
        }
        ops += (tail.len() * m.cols) as u64;
        rank += 1;
    }
    RankInfo { rank, ops }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatFqs {
    tower: FieldTower,
    rows: usize,
    cols: usize,
    data: Vec<Fq>,
}

impl MatFqs {
    pub fn zeros(tower: &FieldTower, rows: usize, cols: usize) -> Self {
        Self {
            tower: tower.clone(),
            rows,
            cols,
            data: vec![0; rows * cols * tower.s()],
        }
    }

    pub fn identity(tower: &FieldTower, n: usize) -> Self {
        let mut m = Self::zeros(tower, n, n);
        for i in 0..n {
            m.entry_mut(i, i)[0] = 1;
        }
        m
    }

    pub fn random<R: Rng + ?Sized>(tower: &FieldTower, rows: usize, cols: usize, rng: &mut R) -> Self {
        let f = tower.base();
        Self {
            tower: tower.clone(),
            rows,
            cols,
            data: (0..rows * cols * tower.s()).map(|_| f.random(rng)).collect(),
        }
    }

    /// Uniform invertible matrix over F_{q^s} by rejection sampling.
    pub fn random_invertible<R: Rng + ?Sized>(tower: &FieldTower, n: usize, rng: &mut R) -> Self {
        loop {
            let m = Self::random(tower, n, n, rng);
            if m.rank() == n {
                return m;
            }
        }
    }

    pub fn from_elems(tower: &FieldTower, rows: usize, cols: usize, elems: &[FqsElem]) -> Result<Self> {
        if elems.len() != rows * cols {
            return Err(dim_err("element count does not match dimensions"));
        }
        let mut m = Self::zeros(tower, rows, cols);
        for (i, e) in elems.iter().enumerate() {
            m.set(i / cols, i % cols, e)?;
        }
        Ok(m)
    }

    /// Embeds an F_q matrix entrywise (F_q ⊂ F_{q^s} as constants).
    pub fn embed(tower: &FieldTower, m: &MatFq) -> Self {
        let mut out = Self::zeros(tower, m.rows(), m.cols());
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                out.entry_mut(r, c)[0] = m.get(r, c);
            }
        }
        out
    }

    pub fn tower(&self) -> &FieldTower {
        &self.tower
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn raw(&self) -> &[Fq] {
        &self.data
    }

    #[inline]
    pub fn entry(&self, r: usize, c: usize) -> &[Fq] {
        let s = self.tower.s();
        let at = (r * self.cols + c) * s;
        &self.data[at..at + s]
    }

    #[inline]
    pub fn entry_mut(&mut self, r: usize, c: usize) -> &mut [Fq] {
        let s = self.tower.s();
        let at = (r * self.cols + c) * s;
        &mut self.data[at..at + s]
    }

    pub fn get(&self, r: usize, c: usize) -> FqsElem {
        self.tower
            .elem(self.entry(r, c).to_vec())
            .expect("stored entries are valid")
    }

    pub fn set(&mut self, r: usize, c: usize, v: &FqsElem) -> Result<()> {
        if v.coords().len() != self.tower.s() {
            return Err(Error::TowerMismatch);
        }
        self.entry_mut(r, c).copy_from_slice(v.coords());
        Ok(())
    }

    /// Row `r` as a flat slice of `cols * s` coordinates.
    pub fn row_raw(&self, r: usize) -> &[Fq] {
        let w = self.cols * self.tower.s();
        &self.data[r * w..(r + 1) * w]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&c| c == 0)
    }

    fn same_tower(&self, other: &Self) -> Result<()> {
        if self.tower != other.tower {
            return Err(Error::TowerMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_tower(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(dim_err(format!(
                "add {}x{} + {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = self.clone();
        out.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a ^= b);
        Ok(out)
    }

    /// Characteristic 2: subtraction is addition.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(other)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_tower(other)?;
        if self.cols != other.rows {
            return Err(dim_err(format!(
                "mul {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let t = &self.tower;
        let mut out = Self::zeros(t, self.rows, other.cols);
        let mut tmp = vec![0; t.s()];
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.entry(i, l);
                if a.iter().all(|&x| x == 0) {
                    continue;
                }
                for j in 0..other.cols {
                    t.mul_into(a, other.entry(l, j), &mut tmp);
                    out.entry_mut(i, j)
                        .iter_mut()
                        .zip(&tmp)
                        .for_each(|(o, x)| *o ^= x);
                }
            }
        }
        Ok(out)
    }

    /// `x * self` for an F_q matrix `x` (the server's `X · Q`).
    pub fn left_mul_fq(&self, x: &MatFq) -> Result<Self> {
        if x.field() != self.tower.base() {
            return Err(Error::TowerMismatch);
        }
        if x.cols() != self.rows {
            return Err(dim_err(format!(
                "mul {}x{} (F_q) * {}x{}",
                x.rows(),
                x.cols(),
                self.rows,
                self.cols
            )));
        }
        let f = self.tower.base();
        let w = self.cols * self.tower.s();
        let mut out = Self::zeros(&self.tower, x.rows(), self.cols);
        for i in 0..x.rows() {
            let dst = &mut out.data[i * w..(i + 1) * w];
            for (l, &a) in x.row(i).iter().enumerate() {
                if a == 0 {
                    continue;
                }
                for (d, &b) in dst.iter_mut().zip(self.row_raw(l)) {
                    *d ^= f.mul(a, b);
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: Fq) -> Self {
        let f = self.tower.base();
        let mut out = self.clone();
        out.data.iter_mut().for_each(|x| *x = f.mul(c, *x));
        out
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols * self.tower.s());
        for &r in idx {
            data.extend_from_slice(self.row_raw(r));
        }
        Self {
            tower: self.tower.clone(),
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn select_cols(&self, idx: &[usize]) -> Self {
        let mut out = Self::zeros(&self.tower, self.rows, idx.len());
        for r in 0..self.rows {
            for (k, &c) in idx.iter().enumerate() {
                out.entry_mut(r, k).copy_from_slice(self.entry(r, c));
            }
        }
        out
    }

    /// Block `j` of rows `[j * size, (j + 1) * size)`.
    pub fn row_block(&self, j: usize, size: usize) -> Self {
        let idx: Vec<usize> = (j * size..(j + 1) * size).collect();
        self.select_rows(&idx)
    }

    /// Removes the row blocks listed in `deleted` (0-indexed, each `size`
    /// rows), keeping the survivors in order.
    pub fn delete_row_blocks(&self, size: usize, deleted: &[usize]) -> Self {
        let idx: Vec<usize> = (0..self.rows)
            .filter(|r| !deleted.contains(&(r / size)))
            .collect();
        self.select_rows(&idx)
    }

    pub fn vstack(parts: &[&Self]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| dim_err("empty stack"))?;
        for p in parts {
            first.same_tower(p)?;
            if p.cols != first.cols {
                return Err(dim_err("vstack column mismatch"));
            }
        }
        let mut data = Vec::new();
        for p in parts {
            data.extend_from_slice(&p.data);
        }
        Ok(Self {
            tower: first.tower.clone(),
            rows: parts.iter().map(|p| p.rows).sum(),
            cols: first.cols,
            data,
        })
    }

    /// Rank over F_{q^s}.
    pub fn rank(&self) -> usize {
        let mut work = self.clone();
        work.eliminate(self.cols, false).0
    }

    pub fn invert(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(dim_err("inverse of a non-square matrix"));
        }
        let n = self.rows;
        let t = &self.tower;
        let mut work = Self::zeros(t, n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                work.entry_mut(r, c).copy_from_slice(self.entry(r, c));
            }
            work.entry_mut(r, n + r)[0] = 1;
        }
        let (rank, pivots) = work.eliminate(n, true);
        if rank < n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
            return Err(Error::Singular);
        }
        let idx: Vec<usize> = (n..2 * n).collect();
        Ok(work.select_cols(&idx))
    }

    fn eliminate(&mut self, pivot_cols: usize, full: bool) -> (usize, Vec<usize>) {
        let t = self.tower.clone();
        let s = t.s();
        let mut rank = 0;
        let mut pivots = Vec::new();
        let mut tmp = vec![0; s];
        for col in 0..pivot_cols {
            if rank == self.rows {
                break;
            }
            let Some(p) = (rank..self.rows).find(|&r| self.entry(r, col).iter().any(|&x| x != 0))
            else {
                continue;
            };
            if p != rank {
                let w = self.cols * s;
                for k in 0..w {
                    self.data.swap(p * w + k, rank * w + k);
                }
            }
            let inv = t.inv(&self.get(rank, col)).expect("pivot is nonzero");
            for c in 0..self.cols {
                t.mul_into(inv.coords(), self.entry(rank, c), &mut tmp);
                self.entry_mut(rank, c).copy_from_slice(&tmp);
            }
            let pivot_row = self.row_raw(rank).to_vec();
            let targets = if full { 0..self.rows } else { rank + 1..self.rows };
            for r in targets {
                if r == rank {
                    continue;
                }
                let factor = self.entry(r, col).to_vec();
                if factor.iter().all(|&x| x == 0) {
                    continue;
                }
                for c in 0..self.cols {
                    t.mul_into(&factor, &pivot_row[c * s..(c + 1) * s], &mut tmp);
                    self.entry_mut(r, c)
                        .iter_mut()
                        .zip(&tmp)
                        .for_each(|(o, x)| *o ^= x);
                }
            }
            pivots.push(col);
            rank += 1;
        }
        (rank, pivots)
    }

    /// F_q-flattening: row r becomes the concatenation of the
    /// Γ-coordinate vectors of its entries (`cols * s` columns).
    pub fn flatten(&self, basis: &BasisGamma) -> MatFq {
        let s = self.tower.s();
        let width = self.cols * s;
        let mut data = vec![0; self.rows * width];
        for r in 0..self.rows {
            for c in 0..self.cols {
                let at = r * width + c * s;
                basis.coords_of(self.entry(r, c), &mut data[at..at + s]);
            }
        }
        MatFq {
            field: self.tower.base().clone(),
            rows: self.rows,
            cols: width,
            data,
        }
    }

    /// Flattening in the power basis: the stored coordinates as they are.
    pub fn flatten_power(&self) -> MatFq {
        MatFq {
            field: self.tower.base().clone(),
            rows: self.rows,
            cols: self.cols * self.tower.s(),
            data: self.data.clone(),
        }
    }

    pub fn payload_bits(&self) -> u64 {
        (self.rows * self.cols * self.tower.s()) as u64 * self.tower.b() as u64
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = header_bytes(self.rows, self.cols);
        out.extend(pack(&self.data, self.tower.b() as usize));
        out
    }

    pub fn from_bytes(tower: &FieldTower, bytes: &[u8]) -> Result<(Self, usize)> {
        let (rows, cols) = read_header(bytes)?;
        let count = rows
            .checked_mul(cols)
            .and_then(|x| x.checked_mul(tower.s()))
            .ok_or_else(|| Error::Format("dimension overflow".into()))?;
        let (data, used) = unpack(&bytes[16..], count, tower.b() as usize)?;
        Ok((
            Self {
                tower: tower.clone(),
                rows,
                cols,
                data,
            },
            16 + used,
        ))
    }
}

/// Kronecker product in block-row layout: an `m·δ x n` matrix whose
/// block j is `w[j] · delta`.
pub fn kron(delta: &MatFqs, w: &[Fq]) -> MatFqs {
    kron_memo(delta, w).0
}

/// As [`kron`], computing each distinct nonzero multiple `c · delta` once.
/// Returns the product and the number of distinct multiples computed.
pub fn kron_memo(delta: &MatFqs, w: &[Fq]) -> (MatFqs, usize) {
    let t = delta.tower();
    let mut memo: HashMap<Fq, MatFqs> = HashMap::new();
    for &c in w {
        if c != 0 && !memo.contains_key(&c) {
            let m = if c == 1 { delta.clone() } else { delta.scale(c) };
            memo.insert(c, m);
        }
    }
    let zero = MatFqs::zeros(t, delta.rows(), delta.cols());
    let parts: Vec<&MatFqs> = w
        .iter()
        .map(|c| if *c == 0 { &zero } else { &memo[c] })
        .collect();
    let out = if parts.is_empty() {
        MatFqs::zeros(t, 0, delta.cols())
    } else {
        MatFqs::vstack(&parts).expect("blocks share shape")
    };
    (out, memo.len())
}

fn header_bytes(rows: usize, cols: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(16);
    out.extend_from_slice(&(rows as u64).to_le_bytes());
    out.extend_from_slice(&(cols as u64).to_le_bytes());
    out
}

fn read_header(bytes: &[u8]) -> Result<(usize, usize)> {
    if bytes.len() < 16 {
        return Err(Error::Truncated {
            needed: 16,
            have: bytes.len(),
        });
    }
    let rows = u64::from_le_bytes(bytes[0..8].try_into().unwrap());
    let cols = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let conv = |x: u64| usize::try_from(x).map_err(|_| Error::Format("dimension overflow".into()));
    Ok((conv(rows)?, conv(cols)?))
}

fn pack(values: &[Fq], bits: usize) -> Vec<u8> {
    let mut bv: BitVec<u8, Lsb0> = BitVec::with_capacity(values.len() * bits);
    for &v in values {
        bv.extend_from_bitslice(&v.view_bits::<Lsb0>()[..bits]);
    }
    bv.into_vec()
}

fn unpack(bytes: &[u8], count: usize, bits: usize) -> Result<(Vec<Fq>, usize)> {
    let total = count
        .checked_mul(bits)
        .ok_or_else(|| Error::Format("dimension overflow".into()))?;
    let need = total.div_ceil(8);
    if bytes.len() < need {
        return Err(Error::Truncated {
            needed: need,
            have: bytes.len(),
        });
    }
    let view = bytes[..need].view_bits::<Lsb0>();
    if view[total..].any() {
        return Err(Error::Format("nonzero padding bits".into()));
    }
    let values = if total == 0 {
        Vec::new()
    } else {
        view[..total].chunks(bits).map(|ch| ch.load_le::<Fq>()).collect()
    };
    Ok((values, need))
}
