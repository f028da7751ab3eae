//! Write the sample operator and gauge-group files used by the CLI docs
//! and tests: `cargo run --example write_samples -- <dir>`.

use std::path::PathBuf;

use fockimpl::builders::{self, ChainWindow};
use fockimpl::experiments::build_example_vphi;
use fockimpl::gauge::GaugeGroup;
use fockimpl::io::save_operator;
use fockimpl::selfdual::{embedding, Kind};

fn main() -> fockimpl::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    std::fs::create_dir_all(&dir)?;

    // deterministic uniform samples in [-1, 1)
    let mut x: u64 = 0x2545_f491_4f6c_dd1d;
    let mut sample = move || {
        x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((x >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    };

    save_operator(&dir.join("car_vphi.json"), &build_example_vphi(std::f64::consts::PI / 8.0, 3)?)?;

    // gauge-invariant map with M_V = 1: a chain shift dressed by invariant unitaries
    let src = ChainWindow { lo: -2, hi: 2 };
    let tgt = ChainWindow { lo: -2, hi: 3 };
    let shift = builders::chain_shift(&src, &tgt, 1)?;
    let left = builders::random_gauge_invariant_car_unitary(&tgt.charges(), 0.6, &mut sample);
    let right = builders::random_gauge_invariant_car_unitary(&src.charges(), 0.6, &mut sample);
    save_operator(&dir.join("car_shift_u1.json"), &left.compose(&shift)?.compose(&right)?)?;
    let group = GaugeGroup::u1(&src.charges(), &tgt.charges(), &[0.3, 1.1, -2.0]);
    std::fs::write(dir.join("group_car_u1.json"), serde_json::to_string(&group.to_file())?)?;

    // bosonic two-mode squeeze with tanh r = 1/2 after adding one mode
    let squeeze = builders::two_mode_squeeze(2, 0, 1, 0.5f64.atanh()).compose(&embedding(Kind::Ccr, 1, 2))?;
    save_operator(&dir.join("ccr_squeeze.json"), &squeeze)?;
    let group = GaugeGroup::u1(&[1], &[1, -1], &[0.5, 1.3]);
    std::fs::write(dir.join("group_ccr_u1.json"), serde_json::to_string(&group.to_file())?)?;
    Ok(())
}
