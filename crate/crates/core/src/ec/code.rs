//! SC-LDPC construction: protograph → coupling → lifting → length/rate
//! adaptation → public shuffle.
//!
//! Lifted nodes are indexed lift-major: variable `(p, t, j)` sits at
//! `p · L·n_v + t·n_v + j`, check `(p, τ, i)` at `p · (L+w)·n_c + τ·n_c + i`.
//! With this layout the "lowest index first" tie-breaks used during
//! adaptation spread removals and merges evenly along the chain instead of
//! concentrating them at one end.

use rand::seq::SliceRandom;
use rand::Rng;

use super::EcError;
use crate::rng::seeded;

/// Base graph: `rows × cols` matrix of edge multiplicities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Protograph {
    rows: usize,
    cols: usize,
    entries: Vec<u8>,
}

impl Protograph {
    pub fn new(rows: usize, cols: usize, entries: Vec<u8>) -> Result<Self, EcError> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(EcError::Construction(format!("bad protograph shape {rows}x{cols}")));
        }
        let p = Self { rows, cols, entries };
        if (0..rows).any(|i| p.row_degree(i) == 0) || (0..cols).any(|j| p.column_degree(j) == 0) {
            return Err(EcError::Construction("protograph has an empty row or column".into()));
        }
        Ok(p)
    }

    /// Smallest base with column degree `dv` and row degree `dc`.
    pub fn regular(dv: usize, dc: usize) -> Result<Self, EcError> {
        if dv == 0 || dc <= dv {
            return Err(EcError::Construction(format!("need 0 < dv < dc, got ({dv}, {dc})")));
        }
        let g = gcd(dv, dc);
        let entry = u8::try_from(g).map_err(|_| EcError::Construction("multiplicity too large".into()))?;
        Self::new(dv / g, dc / g, vec![entry; (dv / g) * (dc / g)])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.entries[i * self.cols + j]
    }

    pub fn row_degree(&self, i: usize) -> usize {
        (0..self.cols).map(|j| self.get(i, j) as usize).sum()
    }

    pub fn column_degree(&self, j: usize) -> usize {
        (0..self.rows).map(|i| self.get(i, j) as usize).sum()
    }

    pub fn design_rate(&self) -> f64 {
        1.0 - self.rows as f64 / self.cols as f64
    }

    /// Rate of the coupled chain before lifting and adaptation.
    pub fn coupled_rate(&self, l: usize, w: usize) -> f64 {
        1.0 - ((l + w) * self.rows) as f64 / (l * self.cols) as f64
    }

    fn max_column_degree(&self) -> usize {
        (0..self.cols).map(|j| self.column_degree(j)).max().unwrap_or(0)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeConfig {
    /// Coupling factor `L`.
    pub coupling: usize,
    /// Coupling width; `d_v - 1` when unset.
    pub width: Option<usize>,
    /// Lifting factor; `ceil(n / (L n_v))` when unset.
    pub lift: Option<usize>,
}

impl Default for CodeConfig {
    fn default() -> Self {
        Self { coupling: 80, width: None, lift: None }
    }
}

/// How a code was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lineage {
    pub d_v: u32,
    pub d_c: u32,
    pub coupling: u32,
    pub width: u32,
    pub lift: u32,
    pub removed_vars: u32,
    pub merged_checks: u32,
}

/// Sparse parity-check matrix with row and column adjacency plus the public
/// shuffle: column `j` of `H` acts on input bit `shuffle[j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScLdpcCode {
    pub(super) n: usize,
    pub(super) row_ptr: Vec<usize>,
    pub(super) row_cols: Vec<u32>,
    pub(super) col_ptr: Vec<usize>,
    pub(super) col_rows: Vec<u32>,
    pub(super) shuffle: Vec<u32>,
    pub(super) shuffle_seed: Option<u64>,
    pub lineage: Lineage,
}

impl ScLdpcCode {
    /// Assembles a code from row adjacency lists and a shuffle seed.
    pub fn from_rows(n: usize, rows: &[Vec<u32>], lineage: Lineage, shuffle_seed: u64) -> Result<Self, EcError> {
        let shuffle = shuffle_from_seed(n, shuffle_seed);
        Self::assemble(n, rows, lineage, shuffle, Some(shuffle_seed))
    }

    pub(super) fn assemble(
        n: usize,
        rows: &[Vec<u32>],
        lineage: Lineage,
        shuffle: Vec<u32>,
        shuffle_seed: Option<u64>,
    ) -> Result<Self, EcError> {
        if shuffle.len() != n || !is_permutation(&shuffle) {
            return Err(EcError::Construction("shuffle is not a permutation of the columns".into()));
        }
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut row_cols = Vec::new();
        row_ptr.push(0);
        let mut col_deg = vec![0usize; n];
        for r in rows {
            for &c in r {
                if c as usize >= n {
                    return Err(EcError::Construction(format!("column {c} out of range")));
                }
                col_deg[c as usize] += 1;
            }
            row_cols.extend_from_slice(r);
            row_ptr.push(row_cols.len());
        }
        let mut col_ptr = vec![0usize; n + 1];
        for j in 0..n {
            col_ptr[j + 1] = col_ptr[j] + col_deg[j];
        }
        let mut fill = col_ptr[..n].to_vec();
        let mut col_rows = vec![0u32; row_cols.len()];
        for (r, cols) in rows.iter().enumerate() {
            for &c in cols {
                col_rows[fill[c as usize]] = r as u32;
                fill[c as usize] += 1;
            }
        }
        Ok(Self { n, row_ptr, row_cols, col_ptr, col_rows, shuffle, shuffle_seed, lineage })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.row_cols.len()
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.row_cols[self.row_ptr[r]..self.row_ptr[r + 1]]
    }

    pub fn column(&self, c: usize) -> &[u32] {
        &self.col_rows[self.col_ptr[c]..self.col_ptr[c + 1]]
    }

    pub fn shuffle(&self) -> &[u32] {
        &self.shuffle
    }

    pub fn shuffle_seed(&self) -> Option<u64> {
        self.shuffle_seed
    }

    pub fn rate(&self) -> f64 {
        1.0 - self.m() as f64 / self.n as f64
    }

    /// Same parity structure with an explicit shuffle.
    pub fn with_shuffle(&self, shuffle: Vec<u32>) -> Result<Self, EcError> {
        if shuffle.len() != self.n || !is_permutation(&shuffle) {
            return Err(EcError::Construction("shuffle is not a permutation of the columns".into()));
        }
        Ok(Self { shuffle, shuffle_seed: None, ..self.clone() })
    }

    /// Syndrome `H · shuffle(a)`.
    pub fn encode(&self, a: &[u8]) -> Result<Vec<u8>, EcError> {
        if a.len() != self.n {
            return Err(EcError::Length { expected: self.n, got: a.len() });
        }
        let shuffled: Vec<u8> = self.shuffle.iter().map(|&s| a[s as usize] & 1).collect();
        Ok(self.syndrome_of_shuffled(&shuffled))
    }

    pub(super) fn syndrome_of_shuffled(&self, bits: &[u8]) -> Vec<u8> {
        (0..self.m()).map(|r| self.row(r).iter().fold(0u8, |acc, &c| acc ^ bits[c as usize])).collect()
    }
}

fn is_permutation(p: &[u32]) -> bool {
    let mut seen = vec![false; p.len()];
    for &x in p {
        match seen.get_mut(x as usize) {
            Some(s) if !*s => *s = true,
            _ => return false,
        }
    }
    true
}

pub(super) fn shuffle_from_seed(n: usize, seed: u64) -> Vec<u32> {
    let mut perm: Vec<u32> = (0..n as u32).collect();
    perm.shuffle(&mut seeded(seed));
    perm
}

/// Lifting factors below this leave too few permutation choices for BP to
/// behave; families that would need a smaller lift are tried last.
pub const MIN_LIFT: usize = 64;

/// Regular family whose coupled rate is closest below `1 - m/n`.
///
/// Families reaching [`MIN_LIFT`] at this `n` come first; ties prefer the
/// smaller variable degree.
pub fn choose_family(n: usize, m: usize, coupling: usize) -> Result<Protograph, EcError> {
    families_by_preference(n, m, coupling).into_iter().next().ok_or_else(|| {
        EcError::Construction(format!("no regular family reaches rate {}", 1.0 - m as f64 / n as f64))
    })
}

fn families_by_preference(n: usize, m: usize, coupling: usize) -> Vec<Protograph> {
    if n == 0 || m >= n {
        return Vec::new();
    }
    let target = 1.0 - m as f64 / n as f64;
    let mut cands = Vec::new();
    for dv in 3..=5usize {
        for dc in dv + 1..=dv * 64 {
            let p = Protograph::regular(dv, dc).expect("dc > dv");
            let r = p.coupled_rate(coupling, dv - 1);
            if r <= target && r > 0.0 {
                let small_lift = n.div_ceil(coupling * p.cols()) < MIN_LIFT;
                cands.push((small_lift, r, dv, p));
            }
        }
    }
    cands.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.total_cmp(&a.1)).then(a.2.cmp(&b.2)));
    cands.into_iter().map(|c| c.3).collect()
}

/// Builds a code of length `n` with exactly `m` checks, trying regular
/// families in order of preference until one adapts cleanly.
pub fn build_for_rate<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    cfg: &CodeConfig,
    rng: &mut R,
) -> Result<ScLdpcCode, EcError> {
    let fams = families_by_preference(n, m, cfg.coupling);
    if fams.is_empty() {
        return Err(EcError::Construction(format!("no regular family for n={n}, m={m}")));
    }
    let mut last = None;
    for base in fams.iter().take(8) {
        match build_code(n, m, base, cfg, rng) {
            Ok(c) => return Ok(c),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Couples, lifts and adapts `base` into an `m × n` code.
pub fn build_code<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    base: &Protograph,
    cfg: &CodeConfig,
    rng: &mut R,
) -> Result<ScLdpcCode, EcError> {
    let l = cfg.coupling;
    if l < 2 {
        return Err(EcError::Construction("coupling factor must be at least 2".into()));
    }
    if n == 0 || m == 0 || m >= n {
        return Err(EcError::Construction(format!("need 0 < m < n, got m={m} n={n}")));
    }
    let dv = base.max_column_degree();
    let w = cfg.width.unwrap_or(dv - 1);
    let (nc, nv) = (base.rows(), base.cols());
    let lift = cfg.lift.unwrap_or_else(|| n.div_ceil(l * nv)).max(1);
    let vars_per_lift = l * nv;
    let checks_per_lift = (l + w) * nc;
    let n_full = vars_per_lift * lift;
    if n_full < n {
        return Err(EcError::Construction(format!("lifting factor {lift} too small for n={n}")));
    }
    if checks_per_lift * lift < m {
        return Err(EcError::Construction(format!(
            "family ({dv},{}) has only {} checks, need {m}",
            base.row_degree(0),
            checks_per_lift * lift
        )));
    }

    // Coupled protograph edges: the k-th edge of v_j goes `(k + j) mod (w+1)`
    // positions forward, so every column touches every offset.
    let mut proto_edges: Vec<(usize, usize)> = Vec::new();
    for t in 0..l {
        for j in 0..nv {
            let mut k = 0usize;
            for i in 0..nc {
                for _ in 0..base.get(i, j) {
                    let off = (k + j) % (w + 1);
                    proto_edges.push(((t + off) * nc + i, t * nv + j));
                    k += 1;
                }
            }
        }
    }

    // Lift: one uniform permutation per protograph edge; parallel edges cancel.
    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(proto_edges.len() * lift);
    let mut perm: Vec<usize> = (0..lift).collect();
    for &(c, v) in &proto_edges {
        perm.shuffle(rng);
        for (p, &q) in perm.iter().enumerate() {
            edges.push(((q * checks_per_lift + c) as u32, (p * vars_per_lift + v) as u32));
        }
    }
    edges.sort_unstable();
    let mut cols: Vec<Vec<u32>> = vec![Vec::new(); n_full];
    let mut i = 0;
    while i < edges.len() {
        let mut j = i;
        while j < edges.len() && edges[j] == edges[i] {
            j += 1;
        }
        if (j - i) % 2 == 1 {
            cols[edges[i].1 as usize].push(edges[i].0);
        }
        i = j;
    }

    // Length adaptation: drop the n_full - n lowest-degree variables.
    let removed = n_full - n;
    let mut order: Vec<usize> = (0..n_full).collect();
    order.sort_by_key(|&v| (cols[v].len(), v));
    let mut keep = vec![true; n_full];
    for &v in &order[..removed] {
        keep[v] = false;
    }
    let mut rows: Vec<Vec<u32>> = vec![Vec::new(); checks_per_lift * lift];
    let mut new_col = 0u32;
    for v in 0..n_full {
        if keep[v] {
            for &c in &cols[v] {
                rows[c as usize].push(new_col);
            }
            new_col += 1;
        }
    }
    rows.retain(|r| !r.is_empty());

    // Rate adaptation: merge pairs among the highest-degree checks.
    if rows.len() < m {
        return Err(EcError::Construction(format!("only {} non-empty checks left, need {m}", rows.len())));
    }
    let merges = rows.len() - m;
    if 2 * merges > rows.len() {
        return Err(EcError::Construction(format!("cannot merge {merges} pairs out of {} checks", rows.len())));
    }
    let mut by_degree: Vec<usize> = (0..rows.len()).collect();
    by_degree.sort_by_key(|&r| (std::cmp::Reverse(rows[r].len()), r));
    let mut partner = vec![usize::MAX; rows.len()];
    for pair in by_degree[..2 * merges].chunks(2) {
        let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
        partner[a] = b;
        partner[b] = a;
    }
    let mut merged: Vec<Vec<u32>> = Vec::with_capacity(m);
    for r in 0..rows.len() {
        match partner[r] {
            usize::MAX => merged.push(std::mem::take(&mut rows[r])),
            p if p > r => {
                let mut u = std::mem::take(&mut rows[r]);
                u.extend_from_slice(&rows[p]);
                u.sort_unstable();
                u.dedup();
                merged.push(u);
            }
            _ => {}
        }
    }
    for r in &mut merged {
        r.sort_unstable();
    }
    debug_assert_eq!(merged.len(), m);

    let lineage = Lineage {
        d_v: dv as u32,
        d_c: base.row_degree(0) as u32,
        coupling: l as u32,
        width: w as u32,
        lift: lift as u32,
        removed_vars: removed as u32,
        merged_checks: merges as u32,
    };
    let code = ScLdpcCode::from_rows(n, &merged, lineage, rng.random())?;
    if let Some(c) = (0..n).find(|&c| code.column(c).len() < 2) {
        return Err(EcError::Construction(format!("column {c} has degree {} after adaptation", code.column(c).len())));
    }
    Ok(code)
}
