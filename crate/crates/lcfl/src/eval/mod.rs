//! Evaluation harness: quality metrics, RD sweeps, Bjontegaard deltas and
//! the model-fit complexity table.

mod bd;
mod metrics;
mod sweep;

pub use bd::{bd_metrics, BdResult};
pub use metrics::{psnr, ssim, ssim_db, PSNR_CAP};
pub use sweep::{
    aggregate_curve, bd_compare, format_bd_report, parse_csv, points_to_csv, rd_sweep, BdRow,
    ChromaPlane, Metric, RdPoint, SweepConfig,
};

use crate::cfl::{fit_cost_counters, FitCost};
use crate::error::Result;

/// Measured and analytic model-fit costs per block size: the instrumented
/// frequency-domain fit next to the spatial-domain formulas 4N+2 / 8N+3.
pub fn complexity_table() -> Result<Vec<(usize, FitCost)>> {
    [4usize, 8, 16]
        .iter()
        .map(|&n| fit_cost_counters(n).map(|c| (n, c)))
        .collect()
}

/// One formatted table of [`complexity_table`].
pub fn format_complexity_table() -> Result<String> {
    let mut out = String::new();
    out.push_str("Model-fit cost per block (multiplies / adds)\n\n");
    out.push_str(&format!(
        "{:<12} {:>16} {:>16}\n",
        "Block", "Spatial", "Freq. domain"
    ));
    for (n, cost) in complexity_table()? {
        out.push_str(&format!(
            "{:<12} {:>10} / {:<4} {:>9} / {:<4}\n",
            format!("{n}x{n}"),
            cost.spatial_mults,
            cost.spatial_adds,
            cost.fd_mults,
            cost.fd_adds
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complexity_table_matches_published_numbers() {
        let table = complexity_table().unwrap();
        let expect = [(4usize, 18u64, 35u64), (8, 34, 67), (16, 66, 131)];
        for ((n, cost), (en, em, ea)) in table.iter().zip(expect) {
            assert_eq!(*n, en);
            assert_eq!(cost.spatial_mults, em);
            assert_eq!(cost.spatial_adds, ea);
            assert_eq!(cost.fd_mults, 29);
            assert_eq!(cost.fd_adds, 53);
        }
        let text = format_complexity_table().unwrap();
        assert!(text.contains("16x16"));
        assert!(text.contains("29"));
    }
}
