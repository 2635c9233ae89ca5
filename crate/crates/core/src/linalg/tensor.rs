use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use super::{matmul_into, LinalgError};

/// Dense row-major tensor: the last index varies fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<C64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<C64>) -> Result<Self, LinalgError> {
        let n: usize = shape.iter().product();
        if shape.contains(&0) || n != data.len() {
            return Err(LinalgError::Shape(format!("{} entries cannot fill shape {shape:?}", data.len())));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Self { shape, data: vec![C64::new(0.0, 0.0); n] }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn reshape(self, shape: Vec<usize>) -> Result<Self, LinalgError> {
        Self::new(shape, self.data)
    }

    /// `out[i_{perm[0]}, …, i_{perm[r-1]}] = self[i_0, …, i_{r-1}]`, i.e. axis
    /// `k` of the result is axis `perm[k]` of the input.
    pub fn permute(&self, perm: &[usize]) -> Result<Self, LinalgError> {
        let r = self.rank();
        let mut seen = vec![false; r];
        if perm.len() != r || perm.iter().any(|&p| p >= r || std::mem::replace(&mut seen[p], true)) {
            return Err(LinalgError::InvalidArgument(format!("{perm:?} is not a permutation of {r} axes")));
        }
        if perm.iter().enumerate().all(|(k, &p)| k == p) {
            return Ok(self.clone());
        }
        let new_shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let old_strides = strides(&self.shape);
        let src_strides: Vec<usize> = perm.iter().map(|&p| old_strides[p]).collect();
        let mut out = Vec::with_capacity(self.data.len());
        let mut idx = vec![0usize; r];
        let mut offset = 0usize;
        for _ in 0..self.data.len() {
            out.push(self.data[offset]);
            for ax in (0..r).rev() {
                idx[ax] += 1;
                offset += src_strides[ax];
                if idx[ax] < new_shape[ax] {
                    break;
                }
                offset -= src_strides[ax] * new_shape[ax];
                idx[ax] = 0;
            }
        }
        Ok(Self { shape: new_shape, data: out })
    }
}

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * shape[k + 1];
    }
    s
}

/// Network contraction in the usual labeled-index convention.
///
/// Each tensor gets one label per axis. A positive label must appear exactly
/// twice in the network and is summed over; labels are eliminated in
/// ascending order. Negative labels are open and must be exactly
/// `-1, -2, …, -k`; the result's axis `j` carries label `-(j+1)`.
pub fn contract(tensors: &[&Tensor], labels: &[&[i32]]) -> Result<Tensor, LinalgError> {
    if tensors.is_empty() || tensors.len() != labels.len() {
        return Err(LinalgError::InvalidArgument("need one label list per tensor".into()));
    }
    let mut dims: BTreeMap<i32, (usize, usize)> = BTreeMap::new();
    for (t, ls) in tensors.iter().zip(labels) {
        if t.rank() != ls.len() {
            return Err(LinalgError::InvalidArgument(format!("tensor of rank {} given {} labels", t.rank(), ls.len())));
        }
        for (&l, &d) in ls.iter().zip(t.shape()) {
            if l == 0 {
                return Err(LinalgError::InvalidArgument("label 0 is reserved".into()));
            }
            let e = dims.entry(l).or_insert((d, 0));
            if e.0 != d {
                return Err(LinalgError::Shape(format!("label {l} has dimensions {} and {d}", e.0)));
            }
            e.1 += 1;
        }
    }
    let mut open = 0;
    for (&l, &(_, count)) in &dims {
        match (l > 0, count) {
            (true, 2) | (false, 1) => {}
            (true, _) => return Err(LinalgError::InvalidArgument(format!("bond label {l} appears {count} times"))),
            (false, _) => return Err(LinalgError::InvalidArgument(format!("open label {l} appears {count} times"))),
        }
        if l < 0 {
            open += 1;
        }
    }
    if (1..=open).any(|k| !dims.contains_key(&-k)) {
        return Err(LinalgError::InvalidArgument("open labels must be -1..-k".into()));
    }

    let mut pool: Vec<(Tensor, Vec<i32>)> =
        tensors.iter().zip(labels).map(|(t, l)| ((*t).clone(), l.to_vec())).collect();
    let bonds: Vec<i32> = dims.keys().copied().filter(|&l| l > 0).collect();
    for bond in bonds {
        let holders: Vec<usize> = (0..pool.len()).filter(|&i| pool[i].1.contains(&bond)).collect();
        match holders.as_slice() {
            [] => continue, // already summed with an earlier bond
            [i] => {
                let (t, l) = pool.swap_remove(*i);
                pool.push(trace(&t, &l, bond)?);
            }
            [i, j] => {
                let (b, lb) = pool.swap_remove(*j);
                let (a, la) = pool.swap_remove(*i);
                pool.push(pair(&a, &la, &b, &lb)?);
            }
            _ => unreachable!("label counts validated above"),
        }
    }
    let (mut acc, mut acc_l) = pool.pop().expect("non-empty pool");
    while let Some((t, l)) = pool.pop() {
        let (r, rl) = pair(&t, &l, &acc, &acc_l)?;
        acc = r;
        acc_l = rl;
    }
    if acc_l.is_empty() {
        return Ok(acc);
    }
    let perm: Vec<usize> =
        (1..=open).map(|k| acc_l.iter().position(|&l| l == -k).expect("open label present")).collect();
    acc.permute(&perm)
}

/// Contracts every label shared by `a` and `b`; result axes are the free axes
/// of `a` followed by those of `b`.
fn pair(a: &Tensor, la: &[i32], b: &Tensor, lb: &[i32]) -> Result<(Tensor, Vec<i32>), LinalgError> {
    let shared: Vec<i32> = la.iter().copied().filter(|l| lb.contains(l)).collect();
    let free_a: Vec<usize> = (0..la.len()).filter(|&k| !shared.contains(&la[k])).collect();
    let free_b: Vec<usize> = (0..lb.len()).filter(|&k| !shared.contains(&lb[k])).collect();
    let sh_a: Vec<usize> = shared.iter().map(|s| la.iter().position(|l| l == s).unwrap()).collect();
    let sh_b: Vec<usize> = shared.iter().map(|s| lb.iter().position(|l| l == s).unwrap()).collect();

    let perm_a: Vec<usize> = free_a.iter().chain(&sh_a).copied().collect();
    let perm_b: Vec<usize> = sh_b.iter().chain(&free_b).copied().collect();
    let ap = a.permute(&perm_a)?;
    let bp = b.permute(&perm_b)?;

    let m: usize = free_a.iter().map(|&k| a.shape[k]).product();
    let k: usize = sh_a.iter().map(|&k| a.shape[k]).product();
    let n: usize = free_b.iter().map(|&k| b.shape[k]).product();
    let mut out = vec![C64::new(0.0, 0.0); m * n];
    matmul_into(&ap.data, &bp.data, &mut out, m, k, n);

    let shape: Vec<usize> = free_a.iter().map(|&k| a.shape[k]).chain(free_b.iter().map(|&k| b.shape[k])).collect();
    let labels: Vec<i32> = free_a.iter().map(|&k| la[k]).chain(free_b.iter().map(|&k| lb[k])).collect();
    // A full contraction leaves a scalar, stored as shape [1] with no labels.
    let shape = if shape.is_empty() { vec![1] } else { shape };
    Ok((Tensor { shape, data: out }, labels))
}

fn trace(t: &Tensor, l: &[i32], bond: i32) -> Result<(Tensor, Vec<i32>), LinalgError> {
    let pos: Vec<usize> = (0..l.len()).filter(|&k| l[k] == bond).collect();
    let (p, q) = (pos[0], pos[1]);
    let rest: Vec<usize> = (0..l.len()).filter(|&k| k != p && k != q).collect();
    let perm: Vec<usize> = rest.iter().copied().chain([p, q]).collect();
    let tp = t.permute(&perm)?;
    let d = t.shape[p];
    let outer: usize = rest.iter().map(|&k| t.shape[k]).product();
    let data: Vec<C64> = (0..outer).map(|o| (0..d).map(|i| tp.data[o * d * d + i * d + i]).sum()).collect();
    let shape: Vec<usize> = rest.iter().map(|&k| t.shape[k]).collect();
    let shape = if shape.is_empty() { vec![1] } else { shape };
    Ok((Tensor { shape, data }, rest.iter().map(|&k| l[k]).collect()))
}
