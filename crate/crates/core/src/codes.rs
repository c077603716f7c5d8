//! Stabilizer codes: the built-in benchmark set, file formats, logical
//! operators and target-state tableaux.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::{self, BitMatrix};
use crate::tableau::{PauliParseError, PauliString, StabilizerTableau, TableauError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetState {
    ZeroL,
    PlusL,
}

impl TargetState {
    pub fn name(self) -> &'static str {
        match self {
            TargetState::ZeroL => "zero",
            TargetState::PlusL => "plus",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "zero" | "zero_l" | "0" => Some(TargetState::ZeroL),
            "plus" | "plus_l" | "+" => Some(TargetState::PlusL),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeFormat {
    PauliText,
    ParityCheckCss,
}

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("unknown code `{0}`")]
    Unknown(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("empty code description")]
    Empty,
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("row {row}: {source}")]
    Pauli { row: usize, source: PauliParseError },
    #[error("row {row} has length {got}, expected {expected}")]
    Ragged { row: usize, expected: usize, got: usize },
    #[error("HX row {x_row} and HZ row {z_row} anticommute")]
    CssCommutation { x_row: usize, z_row: usize },
    #[error("generator {row} anticommutes with generator {other}")]
    NonCommuting { row: usize, other: usize },
    #[error("generator {row} is dependent on the preceding generators")]
    Dependent { row: usize },
    #[error("target tableau: {0}")]
    Tableau(#[from] TableauError),
}

/// Binary parity-check matrices of a CSS code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CssMatrices {
    pub hx: Vec<Vec<bool>>,
    pub hz: Vec<Vec<bool>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeSpec {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub d: Option<usize>,
    pub generators: Vec<PauliString>,
    /// `(X_L, Z_L)` pairs.
    pub logicals: Vec<(PauliString, PauliString)>,
    pub target: TargetState,
    pub css: Option<CssMatrices>,
}

pub const BUILTIN_NAMES: [&str; 7] = [
    "surface_9",
    "carbon_12",
    "reed_muller_15",
    "hamming_15",
    "color_17",
    "color_19",
    "golay_23",
];

fn rows(text: &[&str]) -> Vec<Vec<bool>> {
    text.iter().map(|r| r.bytes().map(|b| b == b'1').collect()).collect()
}

pub fn builtin(name: &str) -> Result<CodeSpec, CodeError> {
    let (hx, hz, d, target) = match name {
        "surface_9" => (
            rows(&["110110000", "000011011", "001001000", "000100100"]),
            rows(&["000110110", "011011000", "110000000", "000000011"]),
            3,
            TargetState::ZeroL,
        ),
        "carbon_12" => (
            rows(&["111000111000", "001110001110", "100011100011", "111111000000", "000000111111"]),
            rows(&["001111010100", "100010111001", "111001100010", "100111001010", "011000110101"]),
            4,
            TargetState::ZeroL,
        ),
        "reed_muller_15" => (
            rows(&["111111110000000", "011011001101100", "001101100111010", "000011110001111"]),
            rows(&[
                "111100000000000",
                "011011000000000",
                "001101100000000",
                "000011110000000",
                "010010001000100",
                "001001000101000",
                "001100000110000",
                "000011000001100",
                "000001100001010",
                "000000110000011",
            ]),
            3,
            TargetState::PlusL,
        ),
        "hamming_15" => {
            let h: Vec<Vec<bool>> = (0..4).map(|r| (1..=15).map(|c: usize| c >> r & 1 == 1).collect()).collect();
            (h.clone(), h, 3, TargetState::ZeroL)
        }
        "color_17" => {
            let h = rows(&[
                "00000100010110000",
                "00000000101001010",
                "00010001000000101",
                "00100010000000101",
                "00001111101100001",
                "01001000001001000",
                "00000000110100010",
                "10110000000000100",
            ]);
            (h.clone(), h, 5, TargetState::ZeroL)
        }
        "color_19" => {
            let h = rows(&[
                "0010010011000000000",
                "0000000000101000011",
                "0000000000110100001",
                "1100000000000011000",
                "1101101000000000100",
                "0010100010000000100",
                "0100001100000001000",
                "0001001100111000000",
                "0001100011010100000",
            ]);
            (h.clone(), h, 5, TargetState::ZeroL)
        }
        "golay_23" => {
            let h = rows(&[
                "01001001111100000000001",
                "10010011111000000000010",
                "01101110001100000000100",
                "11011100011000000001000",
                "11110001001100000010000",
                "10101011100100000100000",
                "00011110110100001000000",
                "00111101101000010000000",
                "01111011010000100000000",
                "11110110100001000000000",
                "10100100111110000000000",
            ]);
            (h.clone(), h, 7, TargetState::ZeroL)
        }
        other => return Err(CodeError::Unknown(other.to_string())),
    };
    CodeSpec::from_css(name, hx, hz, Some(d), target)
}

fn to_bits(row: &[bool]) -> Vec<u64> {
    let mut v = vec![0u64; bits::words_for(row.len().max(1))];
    for (i, &b) in row.iter().enumerate() {
        bits::set(&mut v, i, b);
    }
    v
}

fn matrix(rows: &[Vec<bool>], cols: usize) -> BitMatrix {
    let mut m = BitMatrix::new(cols);
    for r in rows {
        let dst = m.push_zero_row();
        dst.copy_from_slice(&to_bits(r));
    }
    m
}

fn x_type(n: usize, v: &[u64]) -> PauliString {
    PauliString::x_on(n, bits::ones(v).filter(|&q| q < n))
}

fn z_type(n: usize, v: &[u64]) -> PauliString {
    PauliString::z_on(n, bits::ones(v).filter(|&q| q < n))
}

/// Members of `kernel` that are independent modulo `stabilizers`, each of low
/// weight: exhaustive over the kernel when it is small, otherwise a greedy
/// weight reduction of a basis.
fn logical_vectors(kernel: &[Vec<u64>], stabilizers: &BitMatrix, cols: usize) -> Vec<Vec<u64>> {
    let mut span = stabilizers.clone();
    let base_rank = span.rank();
    let mut chosen = Vec::new();
    let k = kernel.len();
    let mut candidates: Vec<Vec<u64>> = if k <= 16 {
        let mut all = Vec::with_capacity(1 << k);
        let mut cur = vec![0u64; bits::words_for(cols.max(1))];
        for i in 1u32..(1 << k) {
            bits::xor_into(&mut cur, &kernel[i.trailing_zeros() as usize]);
            all.push(cur.clone());
        }
        all
    } else {
        kernel
            .iter()
            .map(|v| {
                let mut v = v.clone();
                loop {
                    let w = bits::popcount(&v);
                    let better = stabilizers.rows.iter().find(|s| {
                        let mut t = v.clone();
                        bits::xor_into(&mut t, s);
                        bits::popcount(&t) < w
                    });
                    match better {
                        Some(s) => bits::xor_into(&mut v, s),
                        None => break v,
                    }
                }
            })
            .collect()
    };
    candidates.sort_by_key(|v| (bits::popcount(v), v.iter().rev().copied().collect::<Vec<_>>()));
    for v in candidates {
        let mut trial = span.clone();
        trial.rows.push(v.clone());
        if trial.rank() > base_rank + chosen.len() {
            span = trial;
            chosen.push(v);
        }
    }
    chosen
}

/// `(x | z)` bit vector of length `2n`.
fn symplectic(p: &PauliString) -> Vec<u64> {
    let n = p.n();
    let mut v = vec![0u64; bits::words_for(2 * n)];
    for q in 0..n {
        let (x, z) = p.get(q);
        bits::set(&mut v, q, x);
        bits::set(&mut v, n + q, z);
    }
    v
}

/// `<a, b>` over GF(2) for same-length bit vectors.
fn dot(a: &[u64], b: &[u64]) -> bool {
    bits::and_popcount(a, b) % 2 == 1
}

/// Recombines `xs` so that `<x'_i, z_j> = δ_ij`.
fn dualize(xs: &[Vec<u64>], zs: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let k = zs.len();
    // Solve M c_i = e_i with M[j][l] = <x_l, z_j>.
    let mut m = BitMatrix::new(2 * k);
    for j in 0..k {
        let row = m.push_zero_row();
        for (l, x) in xs.iter().enumerate() {
            bits::set(row, l, dot(x, &zs[j]));
        }
        bits::set(row, k + j, true);
    }
    m.rref();
    (0..k)
        .map(|i| {
            let mut out = vec![0u64; xs[0].len()];
            for (l, row) in m.rows.iter().enumerate() {
                // Row l of the inverse, column i.
                if bits::get(row, k + i) {
                    bits::xor_into(&mut out, &xs[l]);
                }
            }
            out
        })
        .collect()
}

impl CodeSpec {
    /// Builds a CSS code from `H_X`, `H_Z`; rows are validated for length and
    /// the orthogonality `H_X H_Zᵀ = 0`. Dependent check rows are dropped.
    pub fn from_css(
        name: &str,
        hx: Vec<Vec<bool>>,
        hz: Vec<Vec<bool>>,
        d: Option<usize>,
        target: TargetState,
    ) -> Result<Self, CodeError> {
        let n = hx.first().or(hz.first()).map(|r| r.len()).ok_or(CodeError::Empty)?;
        for (row, r) in hx.iter().chain(&hz).enumerate() {
            if r.len() != n {
                return Err(CodeError::Ragged { row, expected: n, got: r.len() });
            }
        }
        for (x_row, x) in hx.iter().enumerate() {
            for (z_row, z) in hz.iter().enumerate() {
                if x.iter().zip(z).filter(|(a, b)| **a && **b).count() % 2 == 1 {
                    return Err(CodeError::CssCommutation { x_row, z_row });
                }
            }
        }
        let mx = matrix(&hx, n);
        let mz = matrix(&hz, n);
        let mut rx = mx.clone();
        rx.rref();
        let mut rz = mz.clone();
        rz.rref();
        let k = n - rx.rows.len() - rz.rows.len();
        let zl = logical_vectors(&mx.null_space(), &mz, n);
        let xl = logical_vectors(&mz.null_space(), &mx, n);
        debug_assert_eq!(zl.len(), k);
        debug_assert_eq!(xl.len(), k);
        let xl = dualize(&xl, &zl);
        let mut generators: Vec<PauliString> = Vec::new();
        for (rows, ctor) in [(&hx, x_type as fn(usize, &[u64]) -> PauliString), (&hz, z_type)] {
            let mut basis = BitMatrix::new(n);
            for r in rows.iter() {
                let v = to_bits(r);
                basis.rows.push(v.clone());
                if basis.rank() == basis.rows.len() {
                    generators.push(ctor(n, &v));
                } else {
                    basis.rows.pop();
                }
            }
        }
        let logicals = xl
            .iter()
            .zip(&zl)
            .map(|(x, z)| (x_type(n, x), z_type(n, z)))
            .collect();
        Ok(CodeSpec {
            name: name.to_string(),
            n,
            k,
            d,
            generators,
            logicals,
            target,
            css: Some(CssMatrices { hx, hz }),
        })
    }

    /// Builds a stabilizer code from Pauli generators. Generator sets made of
    /// pure X-type and Z-type strings with `+` signs are treated as CSS codes.
    pub fn from_generators(
        name: &str,
        generators: Vec<PauliString>,
        d: Option<usize>,
        target: TargetState,
    ) -> Result<Self, CodeError> {
        let n = generators.first().map(|g| g.n()).ok_or(CodeError::Empty)?;
        for (row, g) in generators.iter().enumerate() {
            if g.n() != n {
                return Err(CodeError::Ragged { row, expected: n, got: g.n() });
            }
            for (other, h) in generators[..row].iter().enumerate() {
                if g.anticommutes(h) {
                    return Err(CodeError::NonCommuting { row, other });
                }
            }
        }
        let mut stab = BitMatrix::new(2 * n);
        for (row, g) in generators.iter().enumerate() {
            stab.rows.push(symplectic(g));
            if stab.rank() < stab.rows.len() {
                return Err(CodeError::Dependent { row });
            }
        }
        let pure = |g: &PauliString, want_x: bool| {
            !g.is_negative()
                && (0..n).all(|q| {
                    let (x, z) = g.get(q);
                    if want_x {
                        !z
                    } else {
                        !x
                    }
                })
        };
        if generators.iter().all(|g| pure(g, true) || pure(g, false)) {
            let row = |g: &PauliString, x: bool| (0..n).map(|q| if x { g.get(q).0 } else { g.get(q).1 }).collect();
            let hx = generators.iter().filter(|g| pure(g, true)).map(|g| row(g, true)).collect();
            let hz = generators.iter().filter(|g| !pure(g, true)).map(|g| row(g, false)).collect();
            let mut spec = CodeSpec::from_css(name, hx, hz, d, target)?;
            spec.generators = generators;
            return Ok(spec);
        }
        // Centralizer: v with <v, s> = 0 for the symplectic form, i.e. the
        // null space of the generators with x and z halves swapped.
        let mut swapped = BitMatrix::new(2 * n);
        for s in &stab.rows {
            let row = swapped.push_zero_row();
            for q in 0..n {
                bits::set(row, q, bits::get(s, n + q));
                bits::set(row, n + q, bits::get(s, q));
            }
        }
        let centralizer = swapped.null_space();
        let symp = |a: &[u64], b: &[u64]| {
            let mut c = 0;
            for q in 0..n {
                c += (bits::get(a, q) & bits::get(b, n + q)) as u32;
                c += (bits::get(a, n + q) & bits::get(b, q)) as u32;
            }
            c % 2 == 1
        };
        let mut span = stab.clone();
        let mut extra: Vec<Vec<u64>> = Vec::new();
        for v in centralizer {
            span.rows.push(v.clone());
            if span.rank() == span.rows.len() {
                extra.push(v);
            } else {
                span.rows.pop();
            }
        }
        let mut logicals = Vec::new();
        while let Some(a) = extra.pop() {
            let Some(pos) = extra.iter().position(|b| symp(&a, b)) else {
                break;
            };
            let b = extra.remove(pos);
            for c in extra.iter_mut() {
                let ca = symp(c, &a);
                let cb = symp(c, &b);
                if cb {
                    bits::xor_into(c, &a);
                }
                if ca {
                    bits::xor_into(c, &b);
                }
            }
            let to_pauli = |v: &[u64]| {
                let mut p = PauliString::identity(n);
                for q in 0..n {
                    p.set(q, bits::get(v, q), bits::get(v, n + q));
                }
                p
            };
            logicals.push((to_pauli(&a), to_pauli(&b)));
        }
        let k = n - generators.len();
        debug_assert_eq!(logicals.len(), k);
        Ok(CodeSpec {
            name: name.to_string(),
            n,
            k,
            d,
            generators,
            logicals,
            target,
            css: None,
        })
    }

    pub fn is_css(&self) -> bool {
        self.css.is_some()
    }

    /// Generators followed by the logical `Z` (or `X` for `|+⟩_L`) representatives.
    pub fn target_tableau(&self) -> Result<StabilizerTableau, CodeError> {
        let mut rows = self.generators.clone();
        for (x, z) in &self.logicals {
            rows.push(match self.target {
                TargetState::ZeroL => z.clone(),
                TargetState::PlusL => x.clone(),
            });
        }
        Ok(StabilizerTableau::from_rows(rows)?)
    }

    /// Writes the code in the given format; [`load_code_str`] reads it back.
    pub fn save(&self, format: CodeFormat) -> String {
        let mut s = String::new();
        writeln!(s, "# name {}", self.name).unwrap();
        if let Some(d) = self.d {
            writeln!(s, "# distance {d}").unwrap();
        }
        writeln!(s, "# target {}", self.target.name()).unwrap();
        let bitrow = |r: &[bool]| r.iter().map(|&b| if b { '1' } else { '0' }).collect::<String>();
        match (format, &self.css) {
            (CodeFormat::ParityCheckCss, Some(css)) => {
                s.push_str("HX\n");
                for r in &css.hx {
                    writeln!(s, "{}", bitrow(r)).unwrap();
                }
                s.push_str("HZ\n");
                for r in &css.hz {
                    writeln!(s, "{}", bitrow(r)).unwrap();
                }
            }
            _ => {
                for g in &self.generators {
                    writeln!(s, "{g}").unwrap();
                }
            }
        }
        s
    }
}

pub fn load_code(path: &Path, format: CodeFormat) -> Result<CodeSpec, CodeError> {
    let text = std::fs::read_to_string(path).map_err(|source| CodeError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let fallback = path.file_stem().and_then(|s| s.to_str()).unwrap_or("code");
    load_code_str(&text, format, fallback)
}

/// Parses either format. Directives `# name`, `# distance` and `# target`
/// are optional; other `#` lines are comments.
pub fn load_code_str(text: &str, format: CodeFormat, default_name: &str) -> Result<CodeSpec, CodeError> {
    let mut name = default_name.to_string();
    let mut d = None;
    let mut target = TargetState::ZeroL;
    let mut body: Vec<(usize, &str)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            let mut w = c.split_whitespace();
            let syntax = |message: &str| CodeError::Syntax { line: i + 1, message: message.to_string() };
            match w.next() {
                Some("name") => name = w.next().ok_or_else(|| syntax("missing name"))?.to_string(),
                Some("distance") => {
                    d = Some(w.next().and_then(|v| v.parse().ok()).ok_or_else(|| syntax("bad distance"))?)
                }
                Some("target") => {
                    target = w
                        .next()
                        .and_then(TargetState::parse)
                        .ok_or_else(|| syntax("target must be zero or plus"))?
                }
                _ => {}
            }
            continue;
        }
        body.push((i + 1, line));
    }
    if body.is_empty() {
        return Err(CodeError::Empty);
    }
    match format {
        CodeFormat::PauliText => {
            let gens = body
                .iter()
                .enumerate()
                .map(|(row, (_, l))| PauliString::parse(l).map_err(|source| CodeError::Pauli { row, source }))
                .collect::<Result<Vec<_>, _>>()?;
            CodeSpec::from_generators(&name, gens, d, target)
        }
        CodeFormat::ParityCheckCss => {
            let mut hx = Vec::new();
            let mut hz = Vec::new();
            let mut section = None;
            for (line, l) in body {
                match l.to_ascii_uppercase().as_str() {
                    "HX" => section = Some(0),
                    "HZ" => section = Some(1),
                    _ => {
                        let row: Vec<bool> = l
                            .chars()
                            .filter(|c| !c.is_whitespace())
                            .map(|c| match c {
                                '0' => Ok(false),
                                '1' => Ok(true),
                                other => Err(CodeError::Syntax { line, message: format!("illegal character `{other}`") }),
                            })
                            .collect::<Result<_, _>>()?;
                        match section {
                            Some(0) => hx.push(row),
                            Some(1) => hz.push(row),
                            _ => {
                                return Err(CodeError::Syntax {
                                    line,
                                    message: "matrix row before an HX or HZ header".into(),
                                })
                            }
                        }
                    }
                }
            }
            CodeSpec::from_css(&name, hx, hz, d, target)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_have_expected_parameters() {
        let expect = [
            ("surface_9", 9, 1),
            ("carbon_12", 12, 2),
            ("reed_muller_15", 15, 1),
            ("hamming_15", 15, 7),
            ("color_17", 17, 1),
            ("color_19", 19, 1),
            ("golay_23", 23, 1),
        ];
        for (name, n, k) in expect {
            let c = builtin(name).unwrap();
            assert_eq!((c.n, c.k), (n, k), "{name}");
            assert_eq!(c.generators.len(), n - k);
            for (x, z) in &c.logicals {
                assert!(x.anticommutes(z));
                for g in &c.generators {
                    assert!(g.commutes(x) && g.commutes(z));
                }
            }
            for (i, (xi, _)) in c.logicals.iter().enumerate() {
                for (j, (_, zj)) in c.logicals.iter().enumerate() {
                    assert_eq!(xi.anticommutes(zj), i == j, "{name} logical pairing");
                }
            }
            let t = c.target_tableau().unwrap();
            assert_eq!(t.n(), n);
            assert!(t.to_graph().graph.bipartition().is_some(), "{name} graph is bipartite");
        }
        assert!(matches!(builtin("foo"), Err(CodeError::Unknown(_))));
        assert_eq!(builtin("surface_9").unwrap().generators.len(), 8);
        assert_eq!(builtin("reed_muller_15").unwrap().target, TargetState::PlusL);
    }

    #[test]
    fn save_load_round_trip() {
        for name in BUILTIN_NAMES {
            let c = builtin(name).unwrap();
            for f in [CodeFormat::ParityCheckCss, CodeFormat::PauliText] {
                let text = c.save(f);
                let back = load_code_str(&text, f, "x").unwrap();
                assert_eq!(back.save(f), text);
                assert!(back.target_tableau().unwrap().same_state(&c.target_tableau().unwrap()));
            }
        }
    }

    #[test]
    fn css_errors() {
        let bad = "HX\n110\nHZ\n100\n";
        assert!(matches!(
            load_code_str(bad, CodeFormat::ParityCheckCss, "bad"),
            Err(CodeError::CssCommutation { x_row: 0, z_row: 0 })
        ));
        assert!(matches!(load_code_str("", CodeFormat::ParityCheckCss, "e"), Err(CodeError::Empty)));
        assert!(matches!(load_code_str("# only\n", CodeFormat::PauliText, "e"), Err(CodeError::Empty)));
    }

    #[test]
    fn five_qubit_code_logicals() {
        let gens = ["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"]
            .iter()
            .map(|s| PauliString::parse(s).unwrap())
            .collect();
        let c = CodeSpec::from_generators("five", gens, Some(3), TargetState::ZeroL).unwrap();
        assert_eq!(c.k, 1);
        assert!(!c.is_css());
        c.target_tableau().unwrap();
    }
}
