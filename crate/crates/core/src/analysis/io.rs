//! Serialization of sweep data and JSON reports.
//!
//! Floats are written as `{:.16e}` (17 significant digits) everywhere, so
//! round-tripping through text is exact and output files are comparable
//! byte-for-byte across runs.

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;
use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};
use std::io::{self, BufRead, Write};

use super::mc::{SweepResult, ThetaEstimate};

pub(crate) const SWEEP_HEADER: &str = "family,D,n,p,replicas,hits,mean,stderr,seed";

/// Write a sweep as CSV with the fixed header
/// `family,D,n,p,replicas,hits,mean,stderr,seed`.
pub fn write_sweep_csv<W: Write>(sweep: &SweepResult, out: &mut W) -> io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    let family = sweep.spec.family_name();
    let dim = sweep.spec.dim_label();
    for r in &sweep.rows {
        writeln!(
            out,
            "{},{},{},{:.16e},{},{},{:.16e},{:.16e},{}",
            family, dim, r.n, r.p, r.replicas, r.hits, r.mean, r.stderr, r.seed
        )?;
    }
    Ok(())
}

/// Render a sweep to a CSV string.
pub fn sweep_to_csv(sweep: &SweepResult) -> String {
    let mut buf = Vec::new();
    write_sweep_csv(sweep, &mut buf).expect("in-memory write cannot fail");
    String::from_utf8(buf).expect("CSV is ASCII")
}

fn spec_from_family(family: &str, dim: u32) -> Result<LatticeSpec> {
    match family {
        "hypercubic" => Ok(LatticeSpec::Hypercubic(dim)),
        "triangular" if dim == 2 => Ok(LatticeSpec::Triangular),
        other => Err(Error::Parameter(format!(
            "unknown lattice family {other:?} (dimension {dim})"
        ))),
    }
}

/// Parse sweep CSV produced by [`write_sweep_csv`]. All rows must belong
/// to one lattice.
pub fn read_sweep_csv<R: BufRead>(input: R) -> Result<SweepResult> {
    let mut lines = input.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line.map_err(|e| Error::Parameter(format!("cannot read CSV: {e}")))?,
        None => return Err(Error::Parameter("empty CSV input".into())),
    };
    if header.trim_end() != SWEEP_HEADER {
        return Err(Error::Parameter(format!(
            "unexpected CSV header {header:?}; want {SWEEP_HEADER:?}"
        )));
    }
    let mut spec: Option<LatticeSpec> = None;
    let mut rows = Vec::new();
    for (lineno, line) in lines {
        let line = line.map_err(|e| Error::Parameter(format!("cannot read CSV: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(Error::Parameter(format!(
                "CSV line {}: expected 9 fields, got {}",
                lineno + 1,
                fields.len()
            )));
        }
        let bad =
            |what: &str| Error::Parameter(format!("CSV line {}: bad {what}: {line:?}", lineno + 1));
        let dim: u32 = fields[1].parse().map_err(|_| bad("dimension"))?;
        let row_spec = spec_from_family(fields[0], dim)?;
        match &spec {
            None => spec = Some(row_spec),
            Some(s) if *s == row_spec => {}
            Some(s) => {
                return Err(Error::Parameter(format!(
                    "CSV mixes lattices {s} and {row_spec}"
                )))
            }
        }
        rows.push(ThetaEstimate {
            n: fields[2].parse().map_err(|_| bad("n"))?,
            p: fields[3].parse().map_err(|_| bad("p"))?,
            replicas: fields[4].parse().map_err(|_| bad("replicas"))?,
            hits: fields[5].parse().map_err(|_| bad("hits"))?,
            mean: fields[6].parse().map_err(|_| bad("mean"))?,
            stderr: fields[7].parse().map_err(|_| bad("stderr"))?,
            seed: fields[8].parse().map_err(|_| bad("seed"))?,
        });
    }
    let spec = spec.ok_or_else(|| Error::Parameter("CSV has a header but no rows".into()))?;
    Ok(SweepResult { spec, rows })
}

/// JSON formatter that renders every float as `{:.16e}`, wrapping the
/// standard pretty formatter for everything else.
struct SciFormatter<'a>(PrettyFormatter<'a>);

macro_rules! forward {
    ($($name:ident),* $(,)?) => {
        $(fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
            self.0.$name(w)
        })*
    };
}

impl Formatter for SciFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    forward!(
        begin_array,
        end_array,
        end_array_value,
        begin_object,
        end_object,
        begin_object_value,
        end_object_value,
    );

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
}

/// Serialize any value to pretty JSON with `{:.16e}` floats.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut out, SciFormatter(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .expect("in-memory JSON serialization cannot fail");
    String::from_utf8(out).expect("JSON is UTF-8")
}

/// Serialize any value to compact single-line JSON with default float
/// formatting (used for logs and manifests where exactness is not read
/// back).
pub fn to_compact_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, CompactFormatter);
    value
        .serialize(&mut ser)
        .expect("in-memory JSON serialization cannot fail");
    String::from_utf8(out).expect("JSON is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::mc::theta_sweep;

    #[test]
    fn csv_round_trips_exactly() {
        let sweep = theta_sweep(
            LatticeSpec::Hypercubic(2),
            &[1, 2, 3],
            &[0.1, 1.0 / 3.0, 0.9],
            500,
            77,
            1,
        )
        .unwrap();
        let text = sweep_to_csv(&sweep);
        assert!(text.starts_with(SWEEP_HEADER));
        let back = read_sweep_csv(text.as_bytes()).unwrap();
        assert_eq!(back.spec, sweep.spec);
        assert_eq!(back.rows.len(), sweep.rows.len());
        for (a, b) in back.rows.iter().zip(&sweep.rows) {
            assert_eq!(a.n, b.n);
            assert_eq!(a.p.to_bits(), b.p.to_bits(), "p must round-trip exactly");
            assert_eq!(a.replicas, b.replicas);
            assert_eq!(a.hits, b.hits);
            assert_eq!(a.mean.to_bits(), b.mean.to_bits());
            assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
            assert_eq!(a.seed, b.seed);
        }
    }

    #[test]
    fn csv_rejects_malformed_input() {
        assert!(read_sweep_csv("".as_bytes()).is_err());
        assert!(read_sweep_csv("a,b,c\n".as_bytes()).is_err());
        let hdr = format!("{SWEEP_HEADER}\n");
        assert!(read_sweep_csv(hdr.as_bytes()).is_err()); // no rows
        let short = format!("{SWEEP_HEADER}\nhypercubic,1,2\n");
        assert!(read_sweep_csv(short.as_bytes()).is_err());
        let badfam = format!("{SWEEP_HEADER}\nkagome,2,1,5.0e-1,10,10,1.0e0,0.0e0,3\n");
        assert!(read_sweep_csv(badfam.as_bytes()).is_err());
        let mixed = format!(
            "{SWEEP_HEADER}\nhypercubic,1,1,5.0e-1,10,10,1.0e0,0.0e0,3\ntriangular,2,1,5.0e-1,10,10,1.0e0,0.0e0,3\n"
        );
        assert!(read_sweep_csv(mixed.as_bytes()).is_err());
    }

    #[test]
    fn json_floats_are_full_precision() {
        #[derive(Serialize)]
        struct Row {
            x: f64,
            label: &'static str,
            k: u32,
        }
        let text = to_json_string(&Row {
            x: 0.1,
            label: "a",
            k: 3,
        });
        assert!(text.contains("1.0000000000000001e-1"), "{text}");
        assert!(text.contains("\"label\": \"a\""), "{text}");
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["x"].as_f64().unwrap(), 0.1);
        assert_eq!(parsed["k"].as_u64().unwrap(), 3);
    }

    #[test]
    fn compact_json_is_single_line() {
        let text = to_compact_json(&serde_json::json!({"a": [1, 2], "b": "x"}));
        assert!(!text.contains('\n'));
        assert_eq!(text, r#"{"a":[1,2],"b":"x"}"#);
    }
}
