//! Lower and upper cone bounds for graph distances on the unit disk, for the
//! constant and the singular kernel.
//!
//! cargo run --release --example cone_bounds -- [n] [h]

use liplearn::experiments::{run_cone_study, ConeStudyConfig, PreconditionPolicy};
use liplearn::geometry::Domain;
use liplearn::kernel::KernelProfile;

fn main() -> liplearn::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(10_000, |s| s.parse().expect("n"));
    let h: f64 = args.next().map_or(0.1, |s| s.parse().expect("h"));
    for kernel in [KernelProfile::constant(), KernelProfile::power(1.0)?] {
        let mut config = ConeStudyConfig::new(Domain::unit_ball(2), kernel, n, h);
        config.trials = 3;
        config.policy = PreconditionPolicy::Report;
        for r in run_cone_study(&config)? {
            println!(
                "{kernel:<9} trial {} delta {:.4}: lower margin {:.2e} ({} violations), upper margin {:.2e} ({} violations)",
                r.trial, r.delta_hat, r.lower_margin, r.lower_violations, r.upper_margin, r.upper_violations
            );
        }
    }
    Ok(())
}
