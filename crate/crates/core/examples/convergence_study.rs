//! Star-domain convergence study with Aronsson labels at the four tips.
//!
//! ```text
//! cargo run --release --example convergence_study -- [power:1|constant] [trials] [n ...]
//! ```

use liplearn::experiments::{fit_rate, fit_rate_against_resolution, run_convergence_study, StudyConfig};
use liplearn::kernel::KernelProfile;

fn main() -> liplearn::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let kernel: KernelProfile = args.first().map_or(Ok(KernelProfile::singular()), |s| s.parse())?;
    let trials = args.get(1).map_or(5, |s| s.parse().expect("trials must be an integer"));
    let mut n_list: Vec<usize> = args.iter().skip(2).map(|s| s.parse().expect("n must be an integer")).collect();
    if n_list.is_empty() {
        n_list = vec![1 << 10, 1 << 11, 1 << 12, 1 << 13];
    }

    let config = StudyConfig::star(kernel, n_list.clone(), trials);
    let records = run_convergence_study(&config)?;
    println!("n,mean_sup_error,mean_h,mean_iterations,mean_wall_time_s");
    for n in n_list {
        let rows: Vec<_> = records.iter().filter(|r| r.n == n && r.is_valid()).collect();
        let mean = |f: &dyn Fn(&&liplearn::experiments::ConvergenceRecord) -> f64| {
            rows.iter().map(f).sum::<f64>() / rows.len() as f64
        };
        println!(
            "{n},{:.5e},{:.4},{:.0},{:.2}",
            mean(&|r| r.sup_error),
            mean(&|r| r.h),
            mean(&|r| r.iterations as f64),
            mean(&|r| r.wall_time_s)
        );
    }
    let fit = fit_rate(&records)?;
    let fit_delta = fit_rate_against_resolution(&records)?;
    println!("rate in n: {:.3} (r2 {:.3})", -fit.slope, fit.r_squared);
    println!("rate in delta: {:.3} (r2 {:.3})", fit_delta.slope, fit_delta.r_squared);
    Ok(())
}
