//! Write a snapshot file, read it back, then flip one byte and watch the
//! checksum catch it.

use pod_dg::config::RunConfig;
use pod_dg::fom::run_fom;
use pod_dg::io::SnapshotFile;
use pod_dg::Error;

fn main() -> pod_dg::Result<()> {
    let mut cfg = RunConfig::step_case(64);
    cfg.snapshot_count = 11;
    let out = run_fom(&cfg.fom_config()?)?;

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("snaps.bin");
    let file = SnapshotFile::from_snapshots(&out.snapshots);
    file.write(&path)?;
    let bytes = std::fs::read(&path)?;
    println!("{} records of {} values, {} bytes", file.n_records(), file.record_len(), bytes.len());

    let back = SnapshotFile::read(&path)?;
    assert_eq!(back, file);
    println!("round trip: identical");

    let mut bad = bytes.clone();
    bad[100] ^= 0x01;
    match SnapshotFile::from_bytes(&bad) {
        Err(e @ Error::Checksum { .. }) => println!("corrupted copy rejected: {e}"),
        other => panic!("expected a checksum error, got {other:?}"),
    }
    Ok(())
}
