use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::multi_index::MultiIndex;

/// Graded enumeration of all monomials of degree `<= order` in `dim`
/// variables together with the multiplication and differentiation tables
/// needed for dense truncated arithmetic.
#[derive(Debug)]
pub struct MonomialTable {
    dim: usize,
    order: usize,
    monos: Vec<MultiIndex>,
    degrees: Vec<usize>,
    index: HashMap<MultiIndex, usize>,
    degree_start: Vec<usize>,
    /// Row `i` lists `(j, k)` with `mono_i * mono_j = mono_k`, `deg_k <= order`.
    prod_start: Vec<usize>,
    products: Vec<(u32, u32)>,
    /// `mono_i = mono_{parent.0} * x_{parent.1}` for every non-constant `i`.
    parent: Vec<(usize, usize)>,
    /// Per variable: `(i, j, e)` with `d/dx_v mono_i = e * mono_j`.
    derivs: Vec<Vec<(usize, usize, f64)>>,
}

impl MonomialTable {
    fn build(dim: usize, order: usize) -> Self {
        let mut monos = Vec::new();
        let mut degree_start = Vec::with_capacity(order + 2);
        for d in 0..=order {
            degree_start.push(monos.len());
            monos.extend(MultiIndex::all_of_degree(dim, d));
        }
        degree_start.push(monos.len());
        let degrees: Vec<usize> = monos.iter().map(|m| m.degree()).collect();
        let index: HashMap<MultiIndex, usize> = monos
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();

        let mut products = Vec::new();
        let mut prod_start = Vec::with_capacity(monos.len() + 1);
        for (i, a) in monos.iter().enumerate() {
            prod_start.push(products.len());
            let room = order - degrees[i];
            let end = degree_start[room + 1];
            for (j, b) in monos[..end].iter().enumerate() {
                let k = index[&a.add(b)];
                products.push((j as u32, k as u32));
            }
        }
        prod_start.push(products.len());

        let mut parent = vec![(0, 0); monos.len()];
        for (i, m) in monos.iter().enumerate().skip(1) {
            let var = m.0.iter().position(|&e| e > 0).expect("non-constant");
            parent[i] = (index[&m.lower(var).unwrap()], var);
        }

        let mut derivs = vec![Vec::new(); dim];
        for (v, list) in derivs.iter_mut().enumerate() {
            for (i, m) in monos.iter().enumerate() {
                if let Some(lower) = m.lower(v) {
                    list.push((i, index[&lower], m.0[v] as f64));
                }
            }
        }

        MonomialTable {
            dim,
            order,
            monos,
            degrees,
            index,
            degree_start,
            prod_start,
            products,
            parent,
            derivs,
        }
    }

    /// Shared table for `(dim, order)`.
    pub fn get(dim: usize, order: usize) -> Arc<MonomialTable> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<MonomialTable>>>> =
            OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("monomial table cache poisoned");
        guard
            .entry((dim, order))
            .or_insert_with(|| Arc::new(MonomialTable::build(dim, order)))
            .clone()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.monos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monos.is_empty()
    }

    pub fn monomial(&self, i: usize) -> &MultiIndex {
        &self.monos[i]
    }

    pub fn degree_of(&self, i: usize) -> usize {
        self.degrees[i]
    }

    pub fn index_of(&self, e: &MultiIndex) -> Option<usize> {
        self.index.get(e).copied()
    }

    /// Index range of the monomials of degree exactly `d`.
    pub fn degree_range(&self, d: usize) -> std::ops::Range<usize> {
        if d > self.order {
            return self.monos.len()..self.monos.len();
        }
        self.degree_start[d]..self.degree_start[d + 1]
    }

    /// All `(j, k)` with `mono_i * mono_j = mono_k` inside the truncation.
    pub(crate) fn row(&self, i: usize) -> &[(u32, u32)] {
        &self.products[self.prod_start[i]..self.prod_start[i + 1]]
    }

    pub(crate) fn parent(&self, i: usize) -> (usize, usize) {
        self.parent[i]
    }

    pub(crate) fn derivs(&self, var: usize) -> &[(usize, usize, f64)] {
        &self.derivs[var]
    }

    pub fn var_index(&self, var: usize) -> usize {
        self.index[&MultiIndex::unit(self.dim, var)]
    }
}
