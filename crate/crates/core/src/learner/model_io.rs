//! Line-oriented model file.
//!
//! ```text
//! HPLSV-MODEL v1
//! gamma <g>
//! reward <k_g> <k_r> <k_s> <w>
//! quantizer <dist_bin_size> <dist_cap> <angle_bins> <person_slots>
//! T|S <key indices...> <action> <value>
//! ```
//!
//! Reals are written with 17 significant digits so they parse back bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::Action;
use crate::learner::quantize::{ObsKey, QuantizerConfig};
use crate::learner::train::DualQ;
use crate::reward::RewardConfig;

pub const MODEL_HEADER: &str = "HPLSV-MODEL v1";

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_model(dq: &DualQ) -> String {
    let mut out = String::new();
    let q = &dq.quantizer;
    let r = &dq.reward;
    let _ = writeln!(out, "{MODEL_HEADER}");
    let _ = writeln!(out, "gamma {}", real(dq.gamma));
    let _ = writeln!(out, "reward {} {} {} {}", real(r.k_g), real(r.k_r), real(r.k_s), real(r.w));
    let _ = writeln!(
        out,
        "quantizer {} {} {} {}",
        real(q.dist_bin_size),
        real(q.dist_cap),
        q.angle_bins,
        q.person_slots
    );
    for (tag, table) in [('T', &dq.q_task), ('S', &dq.q_social)] {
        for (key, action, value) in table.nonzero_entries() {
            let _ = writeln!(out, "{tag} {key} {action} {}", real(value));
        }
    }
    out
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    tok.ok_or_else(|| Error::parse(line, format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid {what}")))
}

pub fn parse_model(text: &str) -> Result<DualQ> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    match lines.next() {
        Some((_, h)) if h == MODEL_HEADER => {}
        Some((_, h)) if h.starts_with("HPLSV-MODEL") => {
            return Err(Error::Model(format!("unsupported model version `{h}`")))
        }
        _ => return Err(Error::Model(format!("missing `{MODEL_HEADER}` header"))),
    }

    let mut header = |name: &str| -> Result<(usize, Vec<String>)> {
        let (n, l) = lines
            .next()
            .ok_or_else(|| Error::Model(format!("missing `{name}` line")))?;
        let mut toks = l.split_whitespace();
        if toks.next() != Some(name) {
            return Err(Error::parse(n, format!("expected `{name}`")));
        }
        Ok((n, toks.map(str::to_owned).collect()))
    };

    let (n, g) = header("gamma")?;
    let gamma: f64 = num(g.first().map(String::as_str), n, "gamma")?;
    let (n, r) = header("reward")?;
    let mut it = r.iter().map(String::as_str);
    let reward = RewardConfig {
        k_g: num(it.next(), n, "k_g")?,
        k_r: num(it.next(), n, "k_r")?,
        k_s: num(it.next(), n, "k_s")?,
        w: num(it.next(), n, "w")?,
    };
    let (n, qz) = header("quantizer")?;
    let mut it = qz.iter().map(String::as_str);
    let quantizer = QuantizerConfig {
        dist_bin_size: num(it.next(), n, "dist_bin_size")?,
        dist_cap: num(it.next(), n, "dist_cap")?,
        angle_bins: num(it.next(), n, "angle_bins")?,
        person_slots: num(it.next(), n, "person_slots")?,
    };
    quantizer.validate()?;
    reward.validate()?;
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Model(format!("gamma {gamma} outside [0, 1)")));
    }

    let mut dq = DualQ::empty(quantizer, gamma, reward);
    let key_len = quantizer.key_len();
    for (n, l) in lines {
        if l.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != key_len + 3 {
            return Err(Error::parse(n, format!("expected {} fields", key_len + 3)));
        }
        let table = match toks[0] {
            "T" => &mut dq.q_task,
            "S" => &mut dq.q_social,
            other => return Err(Error::parse(n, format!("unknown table tag `{other}`"))),
        };
        let parts = toks[1..=key_len]
            .iter()
            .map(|t| t.parse::<u8>().map_err(|_| Error::parse(n, "invalid key index")))
            .collect::<Result<Vec<u8>>>()?;
        let key = ObsKey::from_parts(&parts).map_err(|_| Error::parse(n, "invalid key"))?;
        let action: Action = toks[key_len + 1].parse().map_err(|e: String| Error::parse(n, e))?;
        let value: f64 = num(Some(toks[key_len + 2]), n, "value")?;
        table.set(key, action, value);
    }
    Ok(dq)
}

pub fn save(dq: &DualQ, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, write_model(dq)).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<DualQ> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_model(&text)
}
