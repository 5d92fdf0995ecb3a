//! CSV and JSON readers and writers. Detunings are written in MHz.

use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::dynamics::{LineProfile, Provenance};
use crate::error::{Error, Result};
use crate::fit::DataSet;
use crate::units::{angular_to_mhz, mhz_to_angular};

pub const DETUNING_COLUMN: &str = "detuning_mhz";
pub const PROBABILITY_COLUMN: &str = "probability";
pub const SHOTS_COLUMN: &str = "shots";

/// Two-column profile CSV: `detuning_mhz,probability`.
pub fn write_profile_csv<W: Write>(writer: W, profile: &LineProfile) -> Result<()> {
    write_profiles_csv(writer, &[(PROBABILITY_COLUMN.to_string(), profile.clone())])
}

/// Wide CSV with one probability column per named profile. All profiles
/// must share the same grid.
pub fn write_profiles_csv<W: Write>(writer: W, profiles: &[(String, LineProfile)]) -> Result<()> {
    let Some((_, first)) = profiles.first() else {
        return Err(Error::InvalidParameter {
            name: "profiles",
            reason: "nothing to write".into(),
        });
    };
    for (name, p) in profiles {
        if p.detunings() != first.detunings() {
            return Err(Error::GridMismatch(format!("profile '{name}' is on a different grid")));
        }
    }
    let columns: Vec<(&str, &[f64])> = profiles.iter().map(|(n, p)| (n.as_str(), p.probabilities())).collect();
    write_columns_csv(writer, first.detunings(), &columns)
}

/// `detuning_mhz` followed by arbitrary named value columns of equal length.
pub fn write_columns_csv<W: Write>(writer: W, detunings: &[f64], columns: &[(&str, &[f64])]) -> Result<()> {
    if let Some((name, _)) = columns.iter().find(|(_, v)| v.len() != detunings.len()) {
        return Err(Error::GridMismatch(format!(
            "column '{name}' does not have {} values",
            detunings.len()
        )));
    }
    let mut csv = csv::Writer::from_writer(writer);
    let mut header = vec![DETUNING_COLUMN.to_string()];
    header.extend(columns.iter().map(|(n, _)| n.to_string()));
    csv.write_record(&header)?;
    for (i, d) in detunings.iter().enumerate() {
        let mut row = vec![angular_to_mhz(*d).to_string()];
        row.extend(columns.iter().map(|(_, v)| v[i].to_string()));
        csv.write_record(&row)?;
    }
    csv.flush()?;
    Ok(())
}

/// Dataset CSV: `detuning_mhz,probability[,shots]`.
pub fn write_dataset_csv<W: Write>(writer: W, data: &DataSet) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    match data.shots() {
        Some(_) => csv.write_record([DETUNING_COLUMN, PROBABILITY_COLUMN, SHOTS_COLUMN])?,
        None => csv.write_record([DETUNING_COLUMN, PROBABILITY_COLUMN])?,
    }
    for i in 0..data.len() {
        let d = angular_to_mhz(data.detunings()[i]).to_string();
        let p = data.probabilities()[i].to_string();
        match data.shots() {
            Some(s) => csv.write_record([d, p, s[i].to_string()])?,
            None => csv.write_record([d, p])?,
        }
    }
    csv.flush()?;
    Ok(())
}

/// Reads a dataset from any CSV with a `detuning_mhz` column.
///
/// The probability column is `column` if given, else `probability`, else
/// the only remaining column other than `shots`. A `shots` column is
/// optional.
pub fn read_dataset_csv<R: Read>(reader: R, column: Option<&str>) -> Result<DataSet> {
    let mut csv = csv::Reader::from_reader(reader);
    let headers = csv.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h.trim() == name);
    let d_idx = find(DETUNING_COLUMN)
        .ok_or_else(|| Error::Parse(format!("missing '{DETUNING_COLUMN}' column")))?;
    let s_idx = find(SHOTS_COLUMN);
    let p_idx = match column {
        Some(name) => find(name).ok_or_else(|| Error::Parse(format!("missing '{name}' column")))?,
        None => match find(PROBABILITY_COLUMN) {
            Some(i) => i,
            None => {
                let others: Vec<usize> = (0..headers.len()).filter(|i| *i != d_idx && Some(*i) != s_idx).collect();
                match others.as_slice() {
                    [only] => *only,
                    _ => {
                        return Err(Error::Parse(format!(
                            "cannot choose a probability column among {:?}",
                            others.iter().map(|i| &headers[*i]).collect::<Vec<_>>()
                        )))
                    }
                }
            }
        },
    };

    let mut detunings = Vec::new();
    let mut probabilities = Vec::new();
    let mut shots = s_idx.map(|_| Vec::new());
    for (line, record) in csv.records().enumerate() {
        let record = record?;
        let field = |i: usize, what: &str| -> Result<&str> {
            record
                .get(i)
                .map(str::trim)
                .ok_or_else(|| Error::Parse(format!("row {}: missing {what}", line + 1)))
        };
        let number = |i: usize, what: &str| -> Result<f64> {
            let text = field(i, what)?;
            text.parse::<f64>()
                .map_err(|_| Error::Parse(format!("row {}: {what} '{text}' is not a number", line + 1)))
        };
        detunings.push(mhz_to_angular(number(d_idx, DETUNING_COLUMN)?));
        probabilities.push(number(p_idx, "probability")?);
        if let (Some(i), Some(s)) = (s_idx, shots.as_mut()) {
            let text = field(i, SHOTS_COLUMN)?;
            s.push(
                text.parse::<u32>()
                    .map_err(|_| Error::Parse(format!("row {}: shots '{text}' is not a count", line + 1)))?,
            );
        }
    }
    DataSet::new(detunings, probabilities, shots)
}

/// Reads a single-curve profile CSV back as a numeric profile.
pub fn read_profile_csv<R: Read>(reader: R, column: Option<&str>) -> Result<LineProfile> {
    let data = read_dataset_csv(reader, column)?;
    LineProfile::new(data.detunings().to_vec(), data.probabilities().to_vec(), Provenance::Numeric)
}

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_json<W: Write, T: Serialize>(writer: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(writer, value)?;
    Ok(())
}

pub fn read_json<R: Read, T: DeserializeOwned>(reader: R) -> Result<T> {
    Ok(serde_json::from_reader(reader)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::ModelKind;

    fn profile(p: &[f64], provenance: Provenance) -> LineProfile {
        let grid = (0..p.len()).map(|i| mhz_to_angular(i as f64 - 1.0)).collect();
        LineProfile::new(grid, p.to_vec(), provenance).unwrap()
    }

    #[test]
    fn single_profile_layout() {
        let mut out = Vec::new();
        write_profile_csv(&mut out, &profile(&[0.1, 0.9, 0.25], Provenance::Numeric)).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().next().unwrap(), "detuning_mhz,probability");
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().nth(2).unwrap().starts_with("0,"));
    }

    #[test]
    fn wide_csv_and_column_selection() {
        let a = profile(&[0.1, 0.9, 0.25], Provenance::Numeric);
        let b = profile(&[0.2, 0.8, 0.3], Provenance::Analytic(ModelKind::RosenZener));
        let mut out = Vec::new();
        write_profiles_csv(&mut out, &[("numeric".into(), a.clone()), ("rosen_zener".into(), b.clone())]).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().next().unwrap(), "detuning_mhz,numeric,rosen_zener");
        let read = read_dataset_csv(text.as_bytes(), Some("rosen_zener")).unwrap();
        assert_eq!(read.probabilities(), b.probabilities());
        assert!(read_dataset_csv(text.as_bytes(), None).is_err());
        assert!(read_dataset_csv(text.as_bytes(), Some("gaussian")).is_err());
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = profile(&[0.1, 0.9, 0.25], Provenance::Numeric);
        let b = profile(&[0.1, 0.9], Provenance::Numeric);
        assert!(write_profiles_csv(Vec::new(), &[("a".into(), a), ("b".into(), b)]).is_err());
    }

    #[test]
    fn dataset_round_trip_with_shots() {
        let d: Vec<f64> = [-2.0, 0.0, 2.5].iter().map(|m| mhz_to_angular(*m)).collect();
        let data = DataSet::new(d, vec![0.125, 0.5, 0.0625], Some(vec![16, 16, 16])).unwrap();
        let mut out = Vec::new();
        write_dataset_csv(&mut out, &data).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().next().unwrap(), "detuning_mhz,probability,shots");
        let back = read_dataset_csv(text.as_bytes(), None).unwrap();
        assert_eq!(back.probabilities(), data.probabilities());
        assert_eq!(back.shots(), data.shots());
        for (x, y) in back.detunings().iter().zip(data.detunings()) {
            assert!((x - y).abs() <= 1e-15 * y.abs());
        }
    }

    #[test]
    fn parse_errors_name_the_row() {
        let err = read_dataset_csv("detuning_mhz,probability\n0,0.5\n1,abc\n".as_bytes(), None).unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
        let err = read_dataset_csv("freq,probability\n0,0.5\n".as_bytes(), None).unwrap_err();
        assert!(err.to_string().contains("detuning_mhz"), "{err}");
    }

    #[test]
    fn json_helpers_round_trip() {
        let data = DataSet::new(vec![0.0, 1.0], vec![0.5, 0.25], None).unwrap();
        let mut out = Vec::new();
        write_json(&mut out, &data).unwrap();
        let back: DataSet = read_json(out.as_slice()).unwrap();
        assert_eq!(back, data);
    }
}
