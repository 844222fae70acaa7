//! Reading and writing system files.
//!
//! ```text
//! {"m": 2, "d": 1, "k": [1, 1], "weights": [1.0, 1.0] | null,
//!  "blocks": [[[re, im], ...], ...]}
//! ```
//!
//! Block `i` lists its `k_i × d` entries row by row.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use recon_core::linalg::CMatrix;
use recon_core::system::{Parameters, ReconstructionSystem, Weights};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    m: usize,
    d: usize,
    k: Vec<usize>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
    blocks: Vec<Vec<[f64; 2]>>,
}

/// A parsed system together with its declared weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Loaded {
    pub system: ReconstructionSystem,
    pub weights: Option<Weights>,
}

fn field(name: impl Into<String>, msg: impl Into<String>) -> CliError {
    CliError::Input(format!("field `{}`: {}", name.into(), msg.into()))
}

pub fn parse_system(text: &str) -> Result<Loaded, CliError> {
    let raw: SystemFile = serde_json::from_str(text).map_err(|e| {
        CliError::Input(format!("malformed system JSON at line {}, column {}: {e}", e.line(), e.column()))
    })?;
    if raw.k.len() != raw.m {
        return Err(field("k", format!("has {} entries but m = {}", raw.k.len(), raw.m)));
    }
    if raw.blocks.len() != raw.m {
        return Err(field("blocks", format!("has {} blocks but m = {}", raw.blocks.len(), raw.m)));
    }
    let params = Parameters::new(raw.k.clone(), raw.d).map_err(|e| field("k", e.to_string()))?;
    let mut blocks = Vec::with_capacity(raw.m);
    for (i, (entries, &k)) in raw.blocks.iter().zip(&raw.k).enumerate() {
        if entries.len() != k * raw.d {
            return Err(field(
                format!("blocks[{i}]"),
                format!("expected {} = k_{} · d entries, got {}", k * raw.d, i + 1, entries.len()),
            ));
        }
        if let Some(p) = entries.iter().position(|z| !z[0].is_finite() || !z[1].is_finite()) {
            return Err(field(format!("blocks[{i}][{p}]"), "entry is not finite"));
        }
        blocks.push(CMatrix::from_row_iterator(
            k,
            raw.d,
            entries.iter().map(|z| Complex64::new(z[0], z[1])),
        ));
    }
    let system =
        ReconstructionSystem::with_params(params, blocks).map_err(|e| field("blocks", e.to_string()))?;
    let weights = match raw.weights {
        None => None,
        Some(v) => {
            if v.len() != raw.m {
                return Err(field("weights", format!("has {} entries but m = {}", v.len(), raw.m)));
            }
            let w = Weights::new(v).map_err(|e| field("weights", e.to_string()))?;
            check_declared_weights(&system, &w)?;
            Some(w)
        }
    };
    Ok(Loaded { system, weights })
}

fn check_declared_weights(sys: &ReconstructionSystem, w: &Weights) -> Result<(), CliError> {
    for (i, (b, &v)) in sys.blocks().iter().zip(w.values()).enumerate() {
        let target = CMatrix::identity(b.nrows(), b.nrows()).scale(v * v);
        let r = (b * b.adjoint() - target).norm();
        if r > 1e-8 * (1.0 + v * v) {
            return Err(field(
                "weights",
                format!("block {} does not satisfy V_i V_i* = v_i² I (residual {r:e})", i + 1),
            ));
        }
    }
    Ok(())
}

pub fn read_system(path: &Path) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_system(&text).map_err(|e| match e {
        CliError::Input(msg) => CliError::Input(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn num(x: f64) -> String {
    serde_json::to_string(&x).expect("finite floats serialize")
}

/// Entries of one block in file order.
pub fn block_entries(b: &CMatrix) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(b.len());
    for r in 0..b.nrows() {
        for c in 0..b.ncols() {
            out.push([b[(r, c)].re, b[(r, c)].im]);
        }
    }
    out
}

/// Blocks as JSON values; zero-row blocks are allowed here.
pub fn blocks_json(blocks: &[CMatrix]) -> serde_json::Value {
    serde_json::Value::Array(
        blocks
            .iter()
            .map(|b| serde_json::to_value(block_entries(b)).expect("floats serialize"))
            .collect(),
    )
}

/// The system as a JSON value in file layout.
pub fn system_value(sys: &ReconstructionSystem, weights: Option<&Weights>) -> serde_json::Value {
    serde_json::json!({
        "m": sys.m(),
        "d": sys.d(),
        "k": sys.params().k(),
        "weights": weights.map(|w| w.values().to_vec()),
        "blocks": blocks_json(sys.blocks()),
    })
}

/// Canonical file text: one block per line.
pub fn format_system(sys: &ReconstructionSystem, weights: Option<&Weights>) -> String {
    let list = |xs: &mut dyn Iterator<Item = String>| xs.collect::<Vec<_>>().join(", ");
    let mut s = String::new();
    s.push_str("{\n");
    let _ = writeln!(s, "  \"m\": {},", sys.m());
    let _ = writeln!(s, "  \"d\": {},", sys.d());
    let _ = writeln!(s, "  \"k\": [{}],", list(&mut sys.params().k().iter().map(|k| k.to_string())));
    match weights {
        Some(w) => {
            let _ = writeln!(s, "  \"weights\": [{}],", list(&mut w.values().iter().map(|&x| num(x))));
        }
        None => s.push_str("  \"weights\": null,\n"),
    }
    s.push_str("  \"blocks\": [\n");
    let m = sys.m();
    for (i, b) in sys.blocks().iter().enumerate() {
        let entries = list(&mut block_entries(b).into_iter().map(|z| format!("[{}, {}]", num(z[0]), num(z[1]))));
        let _ = writeln!(s, "    [{entries}]{}", if i + 1 < m { "," } else { "" });
    }
    s.push_str("  ]\n}\n");
    s
}

pub fn write_system(path: &Path, sys: &ReconstructionSystem, weights: Option<&Weights>) -> Result<(), CliError> {
    std::fs::write(path, format_system(sys, weights))
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAIR: &str = r#"{"m": 2, "d": 1, "k": [1, 1], "weights": [1.0, 1.0],
        "blocks": [[[1.0, 0.0]], [[0.0, 1.0]]]}"#;

    #[test]
    fn parses_and_validates() {
        let l = parse_system(PAIR).unwrap();
        assert_eq!(l.system.m(), 2);
        assert!((l.system.spectrum()[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn round_trip_is_exact() {
        let l = parse_system(PAIR).unwrap();
        let text = format_system(&l.system, l.weights.as_ref());
        let again = parse_system(&text).unwrap();
        assert_eq!(again, l);
        assert_eq!(format_system(&again.system, again.weights.as_ref()), text);
    }

    #[test]
    fn diagnostics() {
        let e = parse_system("{\"m\": 1,\n \"d\": }").unwrap_err();
        assert!(matches!(&e, CliError::Input(m) if m.contains("line 2")), "{e}");
        let e = parse_system(r#"{"m": 1, "d": 2, "k": [2], "weights": null, "blocks": [[[1, 0]]]}"#).unwrap_err();
        assert!(matches!(&e, CliError::Input(m) if m.contains("blocks[0]")), "{e}");
        let e = parse_system(r#"{"m": 1, "d": 1, "k": [1], "weights": [2.0], "blocks": [[[1, 0]]]}"#).unwrap_err();
        assert!(matches!(&e, CliError::Input(m) if m.contains("weights")), "{e}");
    }
}
