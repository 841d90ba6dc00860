use cournot_mfg::operators::gradient_sharp;
use cournot_mfg::spi::constant_policy;
use cournot_mfg::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn test1(grid: &GridSpecF64, diffusion: DiffusionProfileF64) -> (ModelParamsF64, Vec<f64>) {
    with_growth(grid, diffusion, 0.01)
}

fn with_growth(grid: &GridSpecF64, diffusion: DiffusionProfileF64, growth: f64) -> (ModelParamsF64, Vec<f64>) {
    let price = PriceModel::Ces { wealth: 3.0, growth, elasticity: 1.2, substitution: 0.2 };
    let params = ModelParams::new(0.0, 2.0, 5.0, diffusion, price, grid.horizon()).unwrap();
    let m0 = initial_density(&BumpSpec { center: 3.0, rate: 0.2, floor: 0.7 }, &params, grid).unwrap();
    (params, m0)
}

fn coarse() -> GridSpecF64 {
    build_grid(6.0, 15.0, 30, 90).unwrap()
}

fn solve_from(start: f64, beta: u32, epsilon: f64) -> EquilibriumSolutionF64 {
    solve_on(coarse(), start, beta, epsilon, 0.01)
}

fn solve_on(g: GridSpecF64, start: f64, beta: u32, epsilon: f64, growth: f64) -> EquilibriumSolutionF64 {
    let (p, m0) = with_growth(&g, DiffusionProfile::Constant { sigma: 0.1 }, growth);
    let cfg = SpiConfig { epsilon, max_iters: 20_000, exploitability_every: 25, schedule: LearningSchedule::new(beta).unwrap() };
    spi_solve(&p, &g, &m0, &vec![0.0; g.row_len()], &constant_policy(&g, start * p.q_max()), &cfg).unwrap()
}

#[test]
fn starting_policy_does_not_change_the_equilibrium() {
    let a = solve_from(0.0, 4, 1e-7);
    let b = solve_from(1.0, 4, 1e-7);
    assert!(a.converged && b.converged);
    let diff = grid::l2_distance(&a.smoothed_policy, &b.smoothed_policy);
    let scale = grid::l2_norm(&a.smoothed_policy);
    assert!(diff <= 1e-4 * scale, "relative gap {}", diff / scale);
}

#[test]
fn equilibrium_has_the_expected_structure() {
    let sol = solve_from(0.0, 4, 1e-7);
    let g = sol.grid;
    let p = test1(&g, DiffusionProfile::Constant { sigma: 0.1 }).0;
    assert!(sol.price.values().iter().all(|&v| v > p.linear_cost));
    let (lo, hi) = sol.smoothed_policy.min_max();
    assert!(lo >= 0.0 && hi <= p.q_max());
    let u = &sol.value;
    let scale = u.sup_norm();
    for tau in 0..=g.time_steps() {
        for i in 1..=g.space_cells() {
            assert!(gradient_sharp(u.row(tau), i, g.h()) >= -1e-8 * scale);
            assert!(u.get(tau, i) >= -1e-10);
        }
    }
    let mass = sol.mass.values();
    assert!(mass.windows(2).all(|w| w[1] <= w[0] + 1e-12));
}

fn max_rise_in_time(u: &SpaceTimeField<f64>) -> f64 {
    let g = u.grid();
    let mut worst = f64::NEG_INFINITY;
    for tau in 1..=g.time_steps() {
        for i in 1..=g.space_cells() {
            worst = worst.max(u.get(tau, i) - u.get(tau - 1, i));
        }
    }
    worst
}

#[test]
fn value_decreases_in_time_without_demand_growth() {
    let sol = solve_on(build_grid(6.0, 15.0, 100, 400).unwrap(), 0.0, 4, 1e-7, 0.0);
    assert!(max_rise_in_time(&sol.value) <= 1e-8);
}

// Rising prices make waiting worth something for nearly exhausted
// producers, so U may increase in t near the origin.
#[test]
fn rising_prices_can_lift_value_near_the_origin() {
    let sol = solve_on(build_grid(6.0, 15.0, 100, 400).unwrap(), 0.0, 4, 1e-7, 0.01);
    assert!(sol.price.get(1) > sol.price.get(0));
    assert!(max_rise_in_time(&sol.value) > 0.0);
}

#[test]
fn potential_increases_once_the_iteration_settles() {
    let sol = solve_from(0.0, 2, 1e-5);
    let j: Vec<f64> = sol.history.iter().map(|d| d.j_value).collect();
    assert!(j.len() > 20);
    for w in j[2..].windows(2) {
        assert!(w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0), "J dropped {} -> {}", w[0], w[1]);
    }
}

#[test]
fn weighted_an_is_bounded_by_residual() {
    let sol = solve_from(0.0, 2, 1e-4);
    let max_m = sol.density.min_max().1;
    for d in &sol.history {
        assert!(d.weighted_an <= max_m.sqrt() * d.residual * (1.0 + 1e-12) + 1e-15);
    }
    let first = sol.history[10].weighted_an;
    assert!(sol.history.last().unwrap().weighted_an <= first / 10.0);
}

#[test]
fn exploitability_is_nonnegative_and_decays() {
    let sol = solve_from(0.0, 2, 1e-5);
    let ex: Vec<f64> = sol.history.iter().filter_map(|d| d.exploitability).collect();
    assert!(ex.len() >= 3);
    assert!(ex.iter().all(|&e| e >= -1e-8));
    assert!(*ex.last().unwrap() <= ex[1] / 10.0);
}

#[test]
fn policy_at_the_origin_is_inert() {
    let g = coarse();
    let (p, m0) = test1(&g, DiffusionProfile::Constant { sigma: 0.1 });
    let base = constant_policy(&g, 0.3 * p.q_max());
    let mut bumped = base.clone();
    for tau in 0..=g.time_steps() {
        bumped.set(tau, 0, p.q_max());
    }
    let a = solve_forward(&m0, &base, &p, &g).unwrap();
    let b = solve_forward(&m0, &bumped, &p, &g).unwrap();
    assert_eq!(a.density, b.density);
    let (pa, _) = spi::price_update(&a.density, &base, &p.price, &g).unwrap();
    let (pb, _) = spi::price_update(&b.density, &bumped, &p.price, &g).unwrap();
    assert_eq!(pa, pb);
    let zero = vec![0.0; g.row_len()];
    let ua = policy_evaluation(&base, &pa, &zero, &p, &g).unwrap();
    let ub = policy_evaluation(&bumped, &pb, &zero, &p, &g).unwrap();
    assert_eq!(ua, ub);
}

#[test]
fn random_policies_keep_density_nonnegative_and_mass_nonincreasing() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let g = coarse();
    for diffusion in [DiffusionProfile::Constant { sigma: 0.1 }, DiffusionProfile::Geometric { sigma: 0.1 }] {
        let (p, m0) = test1(&g, diffusion);
        for _ in 0..50 {
            let q = SpaceTimeField::from_fn(&g, FieldKind::Policy, |_, _| rng.gen_range(0.0..=p.q_max()));
            let evo = solve_forward(&m0, &q, &p, &g).unwrap();
            assert!(evo.density.min_max().0 >= -1e-14);
            assert!(evo.mass.values().windows(2).all(|w| w[1] <= w[0] + 1e-12));
        }
    }
}

#[test]
fn single_precision_run_tracks_double() {
    let g64 = coarse();
    let g32: GridSpecF32 = build_grid(6.0f32, 15.0, 30, 90).unwrap();
    let price = PriceModel::Ces { wealth: 3.0f32, growth: 0.01, elasticity: 1.2, substitution: 0.2 };
    let p32 = ModelParams::new(0.0f32, 2.0, 5.0, DiffusionProfile::Constant { sigma: 0.1 }, price, 15.0).unwrap();
    let m0 = initial_density(&BumpSpec { center: 3.0f32, rate: 0.2, floor: 0.7 }, &p32, &g32).unwrap();
    let cfg = SpiConfig { epsilon: 1e-2f32, max_iters: 500, exploitability_every: 0, schedule: LearningSchedule::default() };
    let s32 = spi_solve(&p32, &g32, &m0, &vec![0.0; g32.row_len()], &constant_policy(&g32, 0.0), &cfg).unwrap();
    let s64 = {
        let (p, m0) = test1(&g64, DiffusionProfile::Constant { sigma: 0.1 });
        let cfg = SpiConfig { epsilon: 1e-2, max_iters: 500, exploitability_every: 0, schedule: LearningSchedule::default() };
        spi_solve(&p, &g64, &m0, &vec![0.0; g64.row_len()], &constant_policy(&g64, 0.0), &cfg).unwrap()
    };
    assert_eq!(s32.iterations(), s64.iterations());
    for (a, b) in s32.price.values().iter().zip(s64.price.values()) {
        assert!((f64::from(*a) - b).abs() <= 1e-3 * b.abs());
    }
}
