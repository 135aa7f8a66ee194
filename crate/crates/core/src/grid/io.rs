//! Grid import/export.
//!
//! Binary layout (little endian):
//! `b"MGRD"`, `u32` version, `u32` n, `n×f64` corner, `n×f64` extent, `f64` h,
//! `u32` metadata length, metadata (UTF-8), then the row-major `f64` values.
//! The binary form round-trips bit for bit.
//!
//! CSV layout: header records `n,<n>`, `corner,...`, `extent,...`, `h,<h>`,
//! `meta,<text>`, a `values` marker, then one record per row along the last
//! axis. Floats use the shortest representation that parses back exactly.

use std::io::{Read, Write};

use super::function::GridFunction;
use super::spec::GridSpec;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"MGRD";
const VERSION: u32 = 1;

fn fmt_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

pub fn write_binary<W: Write>(f: &GridFunction, metadata: &str, mut out: W) -> Result<()> {
    let spec = f.spec();
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(spec.dim() as u32).to_le_bytes())?;
    for &c in spec.corner() {
        out.write_all(&c.to_le_bytes())?;
    }
    for a in 0..spec.dim() {
        out.write_all(&spec.extent(a).to_le_bytes())?;
    }
    out.write_all(&spec.h().to_le_bytes())?;
    out.write_all(&(metadata.len() as u32).to_le_bytes())?;
    out.write_all(metadata.as_bytes())?;
    for &v in f.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

/// Reads a binary grid, returning the function and its metadata string.
pub fn read_binary<R: Read>(mut r: R) -> Result<(GridFunction, String)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(fmt_err("not a grid file (bad magic)"));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(fmt_err(format!("unsupported grid format version {version}")));
    }
    let n = read_u32(&mut r)? as usize;
    if n == 0 || n > 16 {
        return Err(fmt_err(format!("implausible grid dimension {n}")));
    }
    let corner = (0..n).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
    let extent = (0..n).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
    let h = read_f64(&mut r)?;
    let meta_len = read_u32(&mut r)? as usize;
    let mut meta = vec![0u8; meta_len];
    r.read_exact(&mut meta)?;
    let meta = String::from_utf8(meta).map_err(|_| fmt_err("metadata is not UTF-8"))?;
    let spec = GridSpec::from_extent(corner, &extent, h)?;
    let values = (0..spec.len()).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
    Ok((GridFunction::new(spec, values)?, meta))
}

pub fn write_csv<W: Write>(f: &GridFunction, metadata: &str, out: W) -> Result<()> {
    let spec = f.spec();
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    let csv_err = |e: csv::Error| fmt_err(e.to_string());
    w.write_record(["n".to_string(), spec.dim().to_string()]).map_err(csv_err)?;
    let mut rec = vec!["corner".to_string()];
    rec.extend(spec.corner().iter().map(|c| c.to_string()));
    w.write_record(&rec).map_err(csv_err)?;
    let mut rec = vec!["extent".to_string()];
    rec.extend((0..spec.dim()).map(|a| spec.extent(a).to_string()));
    w.write_record(&rec).map_err(csv_err)?;
    w.write_record(["h".to_string(), spec.h().to_string()]).map_err(csv_err)?;
    w.write_record(["meta", metadata]).map_err(csv_err)?;
    w.write_record(["values"]).map_err(csv_err)?;
    let row = *spec.cells().last().expect("nonempty grid");
    for chunk in f.values().chunks(row) {
        w.write_record(chunk.iter().map(|v| v.to_string())).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<(GridFunction, String)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(input);
    let mut records = rdr.records();
    let mut next = |what: &str| -> Result<csv::StringRecord> {
        records
            .next()
            .ok_or_else(|| fmt_err(format!("missing {what} record")))?
            .map_err(|e| fmt_err(e.to_string()))
    };
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| fmt_err(format!("bad number {s:?}")));
    let expect_key = |rec: &csv::StringRecord, key: &str| -> Result<()> {
        if rec.get(0) != Some(key) {
            return Err(fmt_err(format!("expected {key} record, found {:?}", rec.get(0))));
        }
        Ok(())
    };
    let rec = next("n")?;
    expect_key(&rec, "n")?;
    let n: usize = rec.get(1).and_then(|s| s.trim().parse().ok()).ok_or_else(|| fmt_err("bad dimension"))?;
    let rec = next("corner")?;
    expect_key(&rec, "corner")?;
    let corner = rec.iter().skip(1).map(parse).collect::<Result<Vec<_>>>()?;
    let rec = next("extent")?;
    expect_key(&rec, "extent")?;
    let extent = rec.iter().skip(1).map(parse).collect::<Result<Vec<_>>>()?;
    let rec = next("h")?;
    expect_key(&rec, "h")?;
    let h = parse(rec.get(1).unwrap_or(""))?;
    if corner.len() != n || extent.len() != n {
        return Err(fmt_err("header dimensions disagree with n"));
    }
    let rec = next("meta")?;
    expect_key(&rec, "meta")?;
    let meta = rec.get(1).unwrap_or("").to_string();
    let rec = next("values")?;
    expect_key(&rec, "values")?;
    let spec = GridSpec::from_extent(corner, &extent, h)?;
    let mut values = Vec::with_capacity(spec.len());
    for rec in records {
        let rec = rec.map_err(|e| fmt_err(e.to_string()))?;
        for s in rec.iter() {
            values.push(parse(s)?);
        }
    }
    Ok((GridFunction::new(spec, values)?, meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> GridFunction {
        let spec = GridSpec::new(vec![-1.0, 0.125], 0.1, vec![3, 4]).unwrap();
        GridFunction::from_fn(spec, |x| (x[0] * 7.3).sin() / 3.0 + x[1]).unwrap()
    }

    #[test]
    fn binary_roundtrip_bit_exact() {
        let f = sample();
        let mut buf = Vec::new();
        write_binary(&f, "maximal: exact", &mut buf).unwrap();
        let (g, meta) = read_binary(buf.as_slice()).unwrap();
        assert_eq!(meta, "maximal: exact");
        assert_eq!(g.spec(), f.spec());
        let a: Vec<u64> = f.values().iter().map(|v| v.to_bits()).collect();
        let b: Vec<u64> = g.values().iter().map(|v| v.to_bits()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_roundtrip() {
        let f = sample();
        let mut buf = Vec::new();
        write_csv(&f, "note, with comma", &mut buf).unwrap();
        let (g, meta) = read_csv(buf.as_slice()).unwrap();
        assert_eq!(meta, "note, with comma");
        assert_eq!(g, f);
    }

    #[test]
    fn bad_magic() {
        assert!(matches!(read_binary(&b"XXXX0000"[..]), Err(Error::Format(_))));
    }
}
