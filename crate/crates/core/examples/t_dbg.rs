use wsbid_core::*;
use wsbid_lp::{solve_warm, SolveOptions};

fn synthetic_scenario(seed: usize, probability: f64, shift: usize) -> Scenario {
    let mut s = Scenario {
        wind: WindCurve::flat(0.0),
        prices: DayPrices::zero(),
        regulation: RegulationPair { pi_up: 0.0, pi_dw: 0.0 },
        probability,
    };
    for t in 0..HOURS {
        let base = 40.0 + 10.0 * ((t as f64 / 24.0) * std::f64::consts::TAU).sin();
        let wig = 1.0 + 0.05 * ((seed * 7 + t) % 11) as f64 / 11.0;
        s.wind.0[t] = 15.0 + 12.0 * ((((seed + shift * 3) * 13 + t * 5) % 17) as f64 / 17.0);
        s.prices.beta_dam[t] = base * wig;
        s.prices.beta_idm[t] = base * wig * 0.97;
        s.prices.gamma_rm[t] = 6.0 * wig;
        s.prices.beta_rm_up[t] = base * wig * 1.1;
        s.prices.beta_rm_dw[t] = base * wig * 0.9;
        s.prices.lambda_bm_up[t] = base * wig * 0.8;
        s.prices.lambda_bm_dw[t] = base * wig * 1.2;
    }
    s.regulation = RegulationPair {
        pi_up: 0.2 + 0.5 * ((seed % 5) as f64 / 5.0),
        pi_dw: 0.1 + 0.4 * ((seed % 7) as f64 / 7.0),
    };
    s
}

fn main() {
    let params = SystemParams {
        rated_wind_power: 40.0, ess_capacity: 20.0, ess_power_limit: 10.0,
        eta_in: 0.9, eta_out: 0.9, initial_energy: 2.0, soc_min: 0.1,
        kappa_rm: 1.2, r_rm_up: 0.5,
    };
    let n = 90;
    let day = |shift: usize| ScenarioSet::new(
        (0..n).map(|k| synthetic_scenario(k, 1.0 / n as f64, shift)).collect()).unwrap();
    let (lp0, _) = build_framework_a(&params, &day(0)).unwrap();
    let opts = SolveOptions::default();
    let (_s0, basis, st0) = solve_warm(&lp0, &opts, None).unwrap();
    println!("cold: iters {} p1 {} total {:?}", st0.iterations, st0.phase1_iterations, st0.time_total);
    let (lp1, _) = build_framework_a(&params, &day(1)).unwrap();
    let (_s1, _b1, st1) = solve_warm(&lp1, &opts, Some(&basis)).unwrap();
    println!("warm: iters {} p1 {} total {:?}", st1.iterations, st1.phase1_iterations, st1.time_total);
}
