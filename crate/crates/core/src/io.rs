//! On-disk formats: the `PODSNAP1` binary snapshot file and the CSV outputs.
//!
//! Layout, all little-endian:
//!
//! ```text
//! magic     8 bytes  "PODSNAP1"
//! version   u32      low 16 bits = 1, bit 31 = mean record present
//! n_elems   u32
//! degree    u32
//! count     u32
//! times     f64 × records
//! coeffs    f64 × records × n_elems × (degree+1)   record, element, mode
//! checksum  u64      wrapping byte sum of times and coeffs
//! ```
//!
//! `records = count`, or `count + 1` when the mean flag is set; the mean is
//! then record 0. Basis files use the time slot of each mode for its
//! eigenvalue and `0` for the mean.

use std::io::Write;
use std::path::Path;

use crate::discretization::{FeField, Mesh1D};
use crate::error::{Error, Result};
use crate::fom::EnergyRecord;
use crate::metrics::ErrorSeries;
use crate::pod::{PodBasis, SnapshotSet};
use crate::rom::RomTrajectory;

pub const MAGIC: &[u8; 8] = b"PODSNAP1";
pub const VERSION: u32 = 1;
pub const MEAN_FLAG: u32 = 1 << 31;
const HEADER_LEN: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotFile {
    pub n_elems: u32,
    pub degree: u32,
    pub has_mean: bool,
    /// One entry per stored record, mean included.
    pub times: Vec<f64>,
    /// Flat coefficients, record-major.
    pub data: Vec<f64>,
}

fn byte_sum(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0u64, |s, &b| s.wrapping_add(b as u64))
}

impl SnapshotFile {
    pub fn record_len(&self) -> usize {
        self.n_elems as usize * (self.degree as usize + 1)
    }

    pub fn n_records(&self) -> usize {
        self.times.len()
    }

    /// Value of the header `count` field.
    pub fn count(&self) -> u32 {
        (self.n_records() - self.has_mean as usize) as u32
    }

    pub fn record(&self, i: usize) -> &[f64] {
        let l = self.record_len();
        &self.data[i * l..(i + 1) * l]
    }

    pub fn from_fields(fields: &[FeField], times: &[f64]) -> Result<Self> {
        let first = fields
            .first()
            .ok_or_else(|| Error::Dimension("nothing to write".into()))?;
        if fields.len() != times.len() {
            return Err(Error::Dimension("one time per field is required".into()));
        }
        let mut data = Vec::with_capacity(fields.len() * first.n_dofs());
        for f in fields {
            first.check_compatible(f)?;
            data.extend_from_slice(f.coeffs());
        }
        Ok(Self {
            n_elems: first.mesh().n_elems() as u32,
            degree: first.degree() as u32,
            has_mean: false,
            times: times.to_vec(),
            data,
        })
    }

    pub fn from_snapshots(s: &SnapshotSet) -> Self {
        Self::from_fields(s.fields(), s.times()).expect("a snapshot set is non-empty and uniform")
    }

    /// Mean as record 0, then the modes with their eigenvalues.
    pub fn from_basis(b: &PodBasis) -> Self {
        let mut fields = vec![b.mean().clone()];
        fields.extend_from_slice(b.modes());
        let mut times = vec![0.0];
        times.extend_from_slice(&b.eigenvalues()[..b.rank()]);
        let mut f = Self::from_fields(&fields, &times).expect("basis fields share one mesh");
        f.has_mean = true;
        f
    }

    fn check_mesh(&self, mesh: &Mesh1D) -> Result<()> {
        if mesh.n_elems() != self.n_elems as usize {
            return Err(Error::MeshMismatch(format!(
                "file has {} elements, mesh has {}",
                self.n_elems,
                mesh.n_elems()
            )));
        }
        Ok(())
    }

    /// Every record as a field on `mesh`.
    pub fn fields(&self, mesh: Mesh1D) -> Result<Vec<FeField>> {
        self.check_mesh(&mesh)?;
        (0..self.n_records())
            .map(|i| FeField::from_coeffs(mesh, self.degree as usize, self.record(i).to_vec()))
            .collect()
    }

    pub fn to_snapshots(&self, mesh: Mesh1D) -> Result<SnapshotSet> {
        if self.has_mean {
            return Err(Error::Format {
                offset: 8,
                reason: "file holds a basis, not snapshots".into(),
            });
        }
        SnapshotSet::new(self.fields(mesh)?, self.times.clone())
    }

    /// Basis with the stored eigenvalues of the retained modes.
    pub fn to_basis(&self, mesh: Mesh1D) -> Result<PodBasis> {
        if !self.has_mean {
            return Err(Error::Format {
                offset: 8,
                reason: "mean flag not set; file holds snapshots, not a basis".into(),
            });
        }
        let mut fields = self.fields(mesh)?;
        let modes = fields.split_off(1);
        let mean = fields.pop().expect("record 0 exists");
        PodBasis::from_parts(mean, modes, self.times[1..].to_vec())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * (self.times.len() + self.data.len()) + 8);
        out.extend_from_slice(MAGIC);
        let version = VERSION | if self.has_mean { MEAN_FLAG } else { 0 };
        for v in [version, self.n_elems, self.degree, self.count()] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for x in self.times.iter().chain(&self.data) {
            out.extend_from_slice(&x.to_le_bytes());
        }
        let sum = byte_sum(&out[HEADER_LEN..]);
        out.extend_from_slice(&sum.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let fmt = |offset: usize, reason: String| Error::Format {
            offset: offset as u64,
            reason,
        };
        if bytes.len() < HEADER_LEN {
            return Err(fmt(bytes.len(), format!("file is {} bytes, shorter than the header", bytes.len())));
        }
        if &bytes[..8] != MAGIC {
            return Err(fmt(0, "bad magic, expected PODSNAP1".into()));
        }
        let word = |i: usize| u32::from_le_bytes(bytes[8 + 4 * i..12 + 4 * i].try_into().unwrap());
        let (version, n_elems, degree, count) = (word(0), word(1), word(2), word(3));
        if version & !MEAN_FLAG != VERSION {
            return Err(fmt(8, format!("unsupported version {}", version & !MEAN_FLAG)));
        }
        if n_elems < 2 {
            return Err(fmt(12, format!("n_elems = {n_elems}, need at least 2")));
        }
        let has_mean = version & MEAN_FLAG != 0;
        let records = count as usize + has_mean as usize;
        let rec_len = n_elems as usize * (degree as usize + 1);
        let n_values = records
            .checked_mul(rec_len + 1)
            .ok_or_else(|| fmt(20, "header sizes overflow".into()))?;
        let expected = HEADER_LEN + 8 * n_values + 8;
        if bytes.len() != expected {
            return Err(fmt(
                bytes.len().min(expected),
                format!("header implies {expected} bytes, file has {}", bytes.len()),
            ));
        }
        let end = expected - 8;
        let stored = u64::from_le_bytes(bytes[end..].try_into().unwrap());
        let computed = byte_sum(&bytes[HEADER_LEN..end]);
        if stored != computed {
            return Err(Error::Checksum {
                offset: end as u64,
                stored,
                computed,
            });
        }
        let mut values = bytes[HEADER_LEN..end]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        let times = values.by_ref().take(records).collect();
        let data = values.collect();
        Ok(Self {
            n_elems,
            degree,
            has_mean,
            times,
            data,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, |w| w.write_all(&self.to_bytes()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
        body(&mut buf)?;
        buf.flush()?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn write_csv(path: &Path, header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    write_atomic(path, |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(header)?;
        for r in rows {
            out.write_record(&r)?;
        }
        out.flush()
    })
}

fn strings(h: &[&str]) -> Vec<String> {
    h.iter().map(|s| s.to_string()).collect()
}

/// Columns `step,t,energy`.
pub fn write_energy_csv(path: &Path, records: &[EnergyRecord]) -> Result<()> {
    let rows = records
        .iter()
        .map(|r| vec![r.step.to_string(), r.t.to_string(), r.energy.to_string()]);
    write_csv(path, &strings(&["step", "t", "energy"]), rows)
}

/// Columns `index,lambda,cumulative_energy_fraction`, 1-based index.
pub fn write_spectrum_csv(path: &Path, eigenvalues: &[f64]) -> Result<()> {
    let total: f64 = eigenvalues.iter().map(|l| l.max(0.0)).sum();
    let mut acc = 0.0;
    let rows = eigenvalues.iter().enumerate().map(|(i, l)| {
        acc += l;
        let frac = if total > 0.0 { acc / total } else { 0.0 };
        vec![(i + 1).to_string(), l.to_string(), frac.to_string()]
    });
    write_csv(path, &strings(&["index", "lambda", "cumulative_energy_fraction"]), rows)
}

/// Columns `step,t,a_1..a_r`.
pub fn write_coeffs_csv(path: &Path, traj: &RomTrajectory) -> Result<()> {
    let r = traj.coeffs.first().map_or(0, Vec::len);
    let mut header = strings(&["step", "t"]);
    header.extend((1..=r).map(|j| format!("a_{j}")));
    let rows = traj.coeffs.iter().enumerate().map(|(n, a)| {
        let mut row = vec![n.to_string(), traj.time(n).to_string()];
        row.extend(a.iter().map(f64::to_string));
        row
    });
    write_csv(path, &header, rows)
}

/// Columns `t,l2,l1`.
pub fn write_error_csv(path: &Path, s: &ErrorSeries) -> Result<()> {
    let rows = (0..s.len()).map(|i| vec![s.times[i].to_string(), s.l2[i].to_string(), s.l1[i].to_string()]);
    write_csv(path, &strings(&["t", "l2", "l1"]), rows)
}

/// Columns `c1,final_l2`.
pub fn write_sweep_csv(path: &Path, rows: &[(f64, f64)]) -> Result<()> {
    let rows = rows.iter().map(|(c, e)| vec![c.to_string(), e.to_string()]);
    write_csv(path, &strings(&["c1", "final_l2"]), rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SnapshotFile {
        let mesh = Mesh1D::unit(3).unwrap();
        let f: Vec<FeField> = (0..2)
            .map(|s| FeField::from_coeffs(mesh, 1, (0..6).map(|i| (s * 6 + i) as f64 * 0.5).collect()).unwrap())
            .collect();
        SnapshotFile::from_fields(&f, &[0.0, 0.25]).unwrap()
    }

    #[test]
    fn header_layout() {
        let b = sample().to_bytes();
        assert_eq!(&b[..8], b"PODSNAP1");
        assert_eq!(u32::from_le_bytes(b[8..12].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(b[12..16].try_into().unwrap()), 3);
        assert_eq!(u32::from_le_bytes(b[16..20].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(b[20..24].try_into().unwrap()), 2);
        assert_eq!(b.len(), 24 + 8 * (2 + 12) + 8);
        assert_eq!(f64::from_le_bytes(b[32..40].try_into().unwrap()), 0.25);
        // record 1, element 0, mode 1
        assert_eq!(f64::from_le_bytes(b[40 + 8 * 7..40 + 8 * 8].try_into().unwrap()), 3.5);
        let sum = b[24..b.len() - 8].iter().map(|&x| x as u64).sum::<u64>();
        assert_eq!(u64::from_le_bytes(b[b.len() - 8..].try_into().unwrap()), sum);
    }

    #[test]
    fn round_trip_and_corruption() {
        let f = sample();
        let mut b = f.to_bytes();
        assert_eq!(SnapshotFile::from_bytes(&b).unwrap(), f);
        b[50] ^= 0x10;
        match SnapshotFile::from_bytes(&b) {
            Err(Error::Checksum { offset, .. }) => assert_eq!(offset as usize, b.len() - 8),
            other => panic!("{other:?}"),
        }
        let short = &f.to_bytes()[..100];
        assert!(matches!(SnapshotFile::from_bytes(short), Err(Error::Format { .. })));
        let mut magic = f.to_bytes();
        magic[0] = b'X';
        assert!(matches!(SnapshotFile::from_bytes(&magic), Err(Error::Format { offset: 0, .. })));
    }

    #[test]
    fn mean_flag_adds_a_record() {
        let mesh = Mesh1D::unit(3).unwrap();
        let mean = FeField::constant(mesh, 1, 0.5);
        let mut m = FeField::zeros(mesh, 1);
        m.element_mut(1)[0] = 1.0;
        let basis = PodBasis::from_parts(mean, vec![m], vec![2.0, 1.0]).unwrap();
        let f = SnapshotFile::from_basis(&basis);
        let b = f.to_bytes();
        assert_eq!(u32::from_le_bytes(b[8..12].try_into().unwrap()), 1 | MEAN_FLAG);
        assert_eq!(u32::from_le_bytes(b[20..24].try_into().unwrap()), 1);
        let back = SnapshotFile::from_bytes(&b).unwrap().to_basis(mesh).unwrap();
        assert_eq!(back.mean(), basis.mean());
        assert_eq!(back.modes(), basis.modes());
        assert_eq!(back.eigenvalues(), &[2.0]);
        assert!(f.to_snapshots(mesh).is_err());
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.bin");
        std::fs::write(&p, b"old").unwrap();
        sample().write(&p).unwrap();
        assert_eq!(SnapshotFile::read(&p).unwrap(), sample());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn spectrum_csv_columns() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("spectrum.csv");
        write_spectrum_csv(&p, &[3.0, 1.0]).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text, "index,lambda,cumulative_energy_fraction\n1,3,0.75\n2,1,1\n");
    }
}
