//! CSV and JSON import/export.
//!
//! Floats in CSV are written with 17 significant digits so every double
//! survives a round trip bit for bit. JSON goes through `serde_json`, whose
//! shortest round-trip formatting is lossless as well.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{RotorParams, WavepacketSpec};
use crate::otoc::OtocSeries;
use crate::spectral::{quasienergies, QuasienergySpectrum};

pub const SPECTRUM_COLUMNS: [&str; 5] = ["index", "re_mu", "im_mu", "re_eps", "im_eps"];
pub const XI_COLUMNS: [&str; 2] = ["re_xi", "im_xi"];
pub const OTOC_COLUMNS: [&str; 4] = ["t", "c_raw", "norm", "c_norm"];

/// `x` in scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Writes a header row and rows of floats.
pub fn write_table<W: Write>(writer: W, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(writer);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|x| fmt_f64(*x)))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a float table whose header must equal `header`. Returns rows.
pub fn read_table<R: Read>(reader: R, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let found: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if found != header {
        return Err(Error::Parse {
            row: 0,
            reason: format!("expected columns {header:?}, found {found:?}"),
        });
    }
    let mut rows = Vec::new();
    for (i, record) in r.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|field| {
                field.parse::<f64>().map_err(|e| Error::Parse {
                    row: i + 1,
                    reason: format!("{field:?}: {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn column(rows: &[Vec<f64>], j: usize) -> Vec<f64> {
    rows.iter().map(|r| r[j]).collect()
}

pub fn write_spectrum_csv<W: Write>(writer: W, spectrum: &QuasienergySpectrum) -> Result<()> {
    let rows = spectrum
        .mus
        .iter()
        .zip(&spectrum.epsilons)
        .enumerate()
        .map(|(i, (mu, eps))| vec![i as f64, mu.re, mu.im, eps.re, eps.im]);
    write_table(writer, &SPECTRUM_COLUMNS, rows)
}

/// Reads a spectrum CSV. Quasienergies are recomputed from `μ`, and `α`
/// from the recomputed values.
pub fn read_spectrum_csv<R: Read>(reader: R) -> Result<QuasienergySpectrum> {
    let rows = read_table(reader, &SPECTRUM_COLUMNS)?;
    let mus: Vec<Complex64> = rows.iter().map(|r| Complex64::new(r[1], r[2])).collect();
    let mut spectrum = quasienergies(&mus)?;
    // keep the stored ε verbatim in case they were produced elsewhere
    spectrum.epsilons = rows.iter().map(|r| Complex64::new(r[3], r[4])).collect();
    Ok(spectrum)
}

pub fn write_points_csv<W: Write>(writer: W, header: [&str; 2], points: &[Complex64]) -> Result<()> {
    write_table(writer, &header, points.iter().map(|z| vec![z.re, z.im]))
}

pub fn read_points_csv<R: Read>(reader: R, header: [&str; 2]) -> Result<Vec<Complex64>> {
    Ok(read_table(reader, &header)?
        .iter()
        .map(|r| Complex64::new(r[0], r[1]))
        .collect())
}

pub fn write_column_csv<W: Write>(writer: W, name: &str, values: &[f64]) -> Result<()> {
    write_table(writer, &[name], values.iter().map(|v| vec![*v]))
}

pub fn read_column_csv<R: Read>(reader: R, name: &str) -> Result<Vec<f64>> {
    Ok(column(&read_table(reader, &[name])?, 0))
}

/// Fit results and run parameters stored next to an OTOC table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OtocMetadata {
    pub alpha_fit: f64,
    pub alpha_clamped: bool,
    pub lambda_fit: Option<f64>,
    pub fit_window: Option<(usize, usize)>,
    pub max_imag_ratio: f64,
    pub max_edge_occupation: f64,
    pub params: RotorParams,
    pub wavepacket: WavepacketSpec,
}

impl OtocMetadata {
    pub fn of(series: &OtocSeries) -> Self {
        Self {
            alpha_fit: series.alpha_fit,
            alpha_clamped: series.alpha_clamped,
            lambda_fit: series.lambda_fit,
            fit_window: series.fit_window,
            max_imag_ratio: series.max_imag_ratio,
            max_edge_occupation: series.max_edge_occupation,
            params: series.params,
            wavepacket: series.wavepacket,
        }
    }
}

pub fn write_otoc_csv<W: Write>(writer: W, series: &OtocSeries) -> Result<()> {
    let rows = (0..series.len()).map(|i| vec![series.times[i] as f64, series.c_raw[i], series.norm[i], series.c_norm[i]]);
    write_table(writer, &OTOC_COLUMNS, rows)
}

/// Rebuilds a series from its CSV table and JSON sidecar.
pub fn read_otoc<R: Read, S: Read>(table: R, sidecar: S) -> Result<OtocSeries> {
    let rows = read_table(table, &OTOC_COLUMNS)?;
    let meta: OtocMetadata = read_json(sidecar)?;
    let mut times = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        if r[0] < 0.0 || r[0].fract() != 0.0 {
            return Err(Error::Parse {
                row: i + 1,
                reason: format!("time {} is not a non-negative integer", r[0]),
            });
        }
        times.push(r[0] as usize);
    }
    Ok(OtocSeries {
        times,
        c_raw: column(&rows, 1),
        norm: column(&rows, 2),
        c_norm: column(&rows, 3),
        alpha_fit: meta.alpha_fit,
        alpha_clamped: meta.alpha_clamped,
        lambda_fit: meta.lambda_fit,
        fit_window: meta.fit_window,
        max_imag_ratio: meta.max_imag_ratio,
        max_edge_occupation: meta.max_edge_occupation,
        params: meta.params,
        wavepacket: meta.wavepacket,
    })
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(mut writer: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, value)?;
    writer.write_all(b"\n")?;
    Ok(())
}

pub fn read_json<R: Read, T: DeserializeOwned>(reader: R) -> Result<T> {
    Ok(serde_json::from_reader(reader)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::otoc::otoc_series;
    use proptest::prelude::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
        assert!(fmt_f64(f64::NAN).parse::<f64>().unwrap().is_nan());
    }

    #[test]
    fn spectrum_round_trip() {
        let mus = vec![
            Complex64::new(0.3, -0.7),
            Complex64::from_polar(1.0, 2.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(1e-3, 5.0),
        ];
        let spectrum = quasienergies(&mus).unwrap();
        let mut buf = Vec::new();
        write_spectrum_csv(&mut buf, &spectrum).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("index,re_mu,im_mu,re_eps,im_eps\n"));
        assert!(!text.contains('\r'));
        assert_eq!(read_spectrum_csv(buf.as_slice()).unwrap(), spectrum);
    }

    #[test]
    fn schema_mismatch_is_an_error() {
        let text = "t,c_raw\n0,1\n";
        assert!(matches!(read_table(text.as_bytes(), &OTOC_COLUMNS), Err(Error::Parse { row: 0, .. })));
        let bad = "re_xi,im_xi\n1.0,abc\n";
        assert!(matches!(read_points_csv(bad.as_bytes(), XI_COLUMNS), Err(Error::Parse { row: 1, .. })));
    }

    #[test]
    fn otoc_round_trip() {
        let p = RotorParams {
            half_size: 16,
            kick_strength: 2.0,
            lambda: 0.2,
            ..RotorParams::default()
        };
        let series = otoc_series(&p, &WavepacketSpec { k0: 0, sigma: 2.0 }, 8).unwrap();
        let (mut table, mut sidecar) = (Vec::new(), Vec::new());
        write_otoc_csv(&mut table, &series).unwrap();
        write_json(&mut sidecar, &OtocMetadata::of(&series)).unwrap();
        assert_eq!(read_otoc(table.as_slice(), sidecar.as_slice()).unwrap(), series);
    }

    proptest! {
        #[test]
        fn floats_round_trip_bitwise(values in prop::collection::vec(any::<f64>(), 1..50)) {
            let mut buf = Vec::new();
            write_column_csv(&mut buf, "s", &values).unwrap();
            let back = read_column_csv(buf.as_slice(), "s").unwrap();
            for (a, b) in values.iter().zip(&back) {
                prop_assert!(a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan()));
            }
        }
    }
}
