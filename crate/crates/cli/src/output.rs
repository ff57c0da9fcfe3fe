use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::Failure;

/// Twelve significant digits, in a form every CSV reader parses.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if x == 0.0 {
        "0".into()
    } else {
        format!("{x:.11e}")
    }
}

/// Writes a header and rows to `out`, or to stdout when `out` is `None`.
pub fn write_csv(out: Option<&Path>, header: &str, rows: &[String]) -> Result<(), Failure> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(
            File::create(p)
                .map_err(|e| Failure::Input(format!("cannot write {}: {e}", p.display())))?,
        ),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = BufWriter::new(sink);
    let io_err = |e: io::Error| Failure::Input(format!("write failed: {e}"));
    writeln!(w, "{header}").map_err(io_err)?;
    for r in rows {
        writeln!(w, "{r}").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Runs `f` on a rayon pool capped by `QOT_THREADS` when that is set.
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("QOT_THREADS") {
        let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            Failure::Input(format!("QOT_THREADS must be a positive integer, got {v:?}"))
        })?;
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Failure::Input(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(0.5), "5.00000000000e-1");
        assert_eq!(num(-1234.5678901234), "-1.23456789012e3");
        assert_eq!(num(0.0), "0");
        let back: f64 = num(std::f64::consts::PI).parse().unwrap();
        assert!((back - std::f64::consts::PI).abs() < 1e-11);
    }
}
