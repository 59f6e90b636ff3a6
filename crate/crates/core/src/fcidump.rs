//! Molpro-convention FCIDUMP reader and writer.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use ndarray::{Array2, Array4};

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;

#[derive(Debug, Clone, PartialEq)]
pub struct FcidumpHeader {
    pub norb: usize,
    pub nelec: usize,
    pub ms2: i64,
    pub orbsym: Vec<i64>,
    pub isym: i64,
}

fn bad(line: usize, msg: impl Into<String>) -> Error {
    Error::Fcidump { line, msg: msg.into() }
}

fn parse_header(text: &str, line: usize) -> Result<FcidumpHeader> {
    // Collapse the namelist into `KEY=v1,v2,...` groups.
    let body = text.trim_start().trim_start_matches(['&', '$']);
    let body = body.strip_prefix("FCI").or_else(|| body.strip_prefix("fci")).unwrap_or(body);
    let mut fields: HashMap<String, Vec<String>> = HashMap::new();
    let mut current: Option<String> = None;
    for tok in body.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
        let upper = tok.to_ascii_uppercase();
        if upper == "&END" || upper == "/" || upper == "$END" || upper == "&" {
            break;
        }
        if let Some((k, v)) = tok.split_once('=') {
            let key = k.trim().to_ascii_uppercase();
            let vals = fields.entry(key.clone()).or_default();
            if !v.is_empty() {
                vals.push(v.to_string());
            }
            current = Some(key);
        } else if let Some(key) = &current {
            fields.get_mut(key).unwrap().push(tok.to_string());
        } else {
            return Err(bad(line, format!("unexpected token '{tok}' in header")));
        }
    }
    let scalar = |key: &str| -> Result<Option<i64>> {
        match fields.get(key) {
            None => Ok(None),
            Some(v) if v.len() == 1 => {
                v[0].parse().map(Some).map_err(|_| bad(line, format!("{key} is not an integer")))
            }
            Some(_) => Err(bad(line, format!("{key} must have exactly one value"))),
        }
    };
    let norb = scalar("NORB")?.ok_or_else(|| bad(line, "missing NORB"))?;
    let nelec = scalar("NELEC")?.ok_or_else(|| bad(line, "missing NELEC"))?;
    if norb <= 0 || nelec < 0 {
        return Err(bad(line, "NORB must be positive and NELEC non-negative"));
    }
    let orbsym = match fields.get("ORBSYM") {
        None => vec![1; norb as usize],
        Some(v) => v
            .iter()
            .map(|s| s.parse::<i64>().map_err(|_| bad(line, "ORBSYM entries must be integers")))
            .collect::<Result<Vec<_>>>()?,
    };
    if orbsym.len() != norb as usize {
        return Err(bad(line, format!("ORBSYM has {} entries, NORB is {norb}", orbsym.len())));
    }
    Ok(FcidumpHeader {
        norb: norb as usize,
        nelec: nelec as usize,
        ms2: scalar("MS2")?.unwrap_or(0),
        orbsym,
        isym: scalar("ISYM")?.unwrap_or(1),
    })
}

/// Spatial integrals as read from a dump.
#[derive(Debug, Clone)]
pub struct SpatialIntegrals {
    pub header: FcidumpHeader,
    pub h: Array2<f64>,
    pub eri: Array4<f64>,
    pub core_energy: f64,
}

impl SpatialIntegrals {
    pub fn into_hamiltonian(self) -> Result<Hamiltonian> {
        let labels: Vec<String> = (0..self.header.norb).map(|p| format!("orb{}", p + 1)).collect();
        Hamiltonian::from_spatial(&self.h, &self.eri, self.core_energy, self.header.nelec, &labels)
    }
}

fn set_eri(eri: &mut Array4<f64>, i: usize, j: usize, k: usize, l: usize, x: f64) {
    for (a, b, c, d) in [
        (i, j, k, l),
        (j, i, k, l),
        (i, j, l, k),
        (j, i, l, k),
        (k, l, i, j),
        (l, k, i, j),
        (k, l, j, i),
        (l, k, j, i),
    ] {
        eri[[a, b, c, d]] = x;
    }
}

pub fn read_integrals<R: BufRead>(source: R) -> Result<SpatialIntegrals> {
    let mut lines = source.lines().enumerate();
    let mut header_text = String::new();
    let mut header_line = 1;
    let mut started = false;
    for (n, line) in lines.by_ref() {
        let line = line?;
        let t = line.trim();
        if !started {
            if t.is_empty() {
                continue;
            }
            if !(t.starts_with('&') || t.starts_with('$')) {
                return Err(bad(n + 1, "expected namelist header starting with &FCI"));
            }
            started = true;
            header_line = n + 1;
        }
        header_text.push(' ');
        header_text.push_str(t);
        let upper = t.to_ascii_uppercase();
        if upper.ends_with("&END") || upper == "/" || upper.ends_with(" /") || upper.ends_with("$END") {
            break;
        }
    }
    if !started {
        return Err(bad(1, "empty input"));
    }
    let header = parse_header(&header_text, header_line)?;
    let m = header.norb;
    let mut h = Array2::zeros((m, m));
    let mut eri = Array4::zeros((m, m, m, m));
    let mut core_energy = 0.0;
    let mut symmetry_warned = false;
    for (n, line) in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let toks: Vec<&str> = t.split_whitespace().collect();
        if toks.len() != 5 {
            return Err(bad(n + 1, format!("expected 5 fields, found {}", toks.len())));
        }
        let x: f64 = toks[0]
            .replace(['D', 'd'], "E")
            .parse()
            .map_err(|_| bad(n + 1, format!("bad value '{}'", toks[0])))?;
        let mut idx = [0usize; 4];
        for (slot, tok) in idx.iter_mut().zip(&toks[1..]) {
            let v: i64 = tok.parse().map_err(|_| bad(n + 1, format!("bad index '{tok}'")))?;
            if v < 0 || v as usize > m {
                return Err(Error::IndexOutOfRange { index: v.max(0) as usize, n: m });
            }
            *slot = v as usize;
        }
        let [i, j, k, l] = idx;
        if !symmetry_warned && x != 0.0 {
            let sym = |p: usize| if p == 0 { 0 } else { header.orbsym[p - 1] - 1 };
            if (sym(i) ^ sym(j) ^ sym(k) ^ sym(l)) != 0 {
                log::warn!("line {}: integral does not conserve ORBSYM labels; labels ignored", n + 1);
                symmetry_warned = true;
            }
        }
        match (i, j, k, l) {
            (0, 0, 0, 0) => core_energy = x,
            (_, 0, 0, 0) => {} // orbital energy, unused
            (i, j, 0, 0) if j > 0 => {
                h[[i - 1, j - 1]] = x;
                h[[j - 1, i - 1]] = x;
            }
            (i, j, k, l) if i > 0 && j > 0 && k > 0 && l > 0 => set_eri(&mut eri, i - 1, j - 1, k - 1, l - 1, x),
            _ => return Err(bad(n + 1, "unrecognized index pattern")),
        }
    }
    Ok(SpatialIntegrals { header, h, eri, core_energy })
}

pub fn load_fcidump<R: BufRead>(source: R) -> Result<Hamiltonian> {
    read_integrals(source)?.into_hamiltonian()
}

pub fn write_integrals<W: Write>(mut w: W, ints: &SpatialIntegrals) -> Result<()> {
    let hd = &ints.header;
    let m = hd.norb;
    writeln!(w, " &FCI NORB={},NELEC={},MS2={},", m, hd.nelec, hd.ms2)?;
    let syms: Vec<String> = hd.orbsym.iter().map(|s| s.to_string()).collect();
    writeln!(w, "  ORBSYM={},", syms.join(","))?;
    writeln!(w, "  ISYM={},", hd.isym)?;
    writeln!(w, " &END")?;
    for i in 0..m {
        for j in 0..=i {
            for k in 0..m {
                for l in 0..=k {
                    if i * (i + 1) / 2 + j < k * (k + 1) / 2 + l {
                        continue;
                    }
                    let x = ints.eri[[i, j, k, l]];
                    if x != 0.0 {
                        writeln!(w, "{:24.17e} {:4} {:4} {:4} {:4}", x, i + 1, j + 1, k + 1, l + 1)?;
                    }
                }
            }
        }
    }
    for i in 0..m {
        for j in 0..=i {
            let x = ints.h[[i, j]];
            if x != 0.0 {
                writeln!(w, "{:24.17e} {:4} {:4} {:4} {:4}", x, i + 1, j + 1, 0, 0)?;
            }
        }
    }
    writeln!(w, "{:24.17e} {:4} {:4} {:4} {:4}", ints.core_energy, 0, 0, 0, 0)?;
    Ok(())
}

/// Writes a spin-restricted Hamiltonian back out as an FCIDUMP.
pub fn write_fcidump<W: Write>(w: W, h: &Hamiltonian) -> Result<()> {
    let (hs, eri) = h.spatial_integrals();
    let m = hs.nrows();
    let ints = SpatialIntegrals {
        header: FcidumpHeader { norb: m, nelec: h.n_electrons(), ms2: 0, orbsym: vec![1; m], isym: 1 },
        h: hs,
        eri,
        core_energy: h.scalar_shift(),
    };
    write_integrals(w, &ints)
}
