//! Named experiment configurations.

use crate::config::{
    BumpConfig, DiffusionConfig, GridConfig, ModelConfig, OutputConfig, PriceConfig, RunConfig, SolverConfig,
    TerminalConfig,
};
use crate::error::RunError;

pub const PRESETS: [&str; 6] = ["test1-bm", "test1-gbm", "oil", "test1-bm-ci", "test1-gbm-ci", "oil-ci"];

pub fn preset(name: &str) -> Result<RunConfig, RunError> {
    let (base, ci) = match name.strip_suffix("-ci") {
        Some(base) => (base, true),
        None => (name, false),
    };
    let mut cfg = match base {
        "test1-bm" => test1(name, DiffusionConfig::Constant { sigma: 0.1 }),
        "test1-gbm" => test1(name, DiffusionConfig::Geometric { sigma: 0.1 }),
        "oil" => oil(name),
        _ => {
            return Err(RunError::Usage(format!(
                "unknown preset `{name}`; available: {}",
                PRESETS.join(", ")
            )))
        }
    };
    if ci {
        let (nl, nt) = if base == "oil" { (120, 300) } else { (100, 400) };
        cfg.grid.space_cells = nl;
        cfg.grid.time_steps = nt;
    }
    Ok(cfg)
}

fn test1(name: &str, diffusion: DiffusionConfig) -> RunConfig {
    RunConfig {
        name: name.to_string(),
        grid: GridConfig { length: 6.0, horizon: 15.0, space_cells: 300, time_steps: 2000 },
        model: ModelConfig {
            discount: 0.0,
            linear_cost: 2.0,
            quadratic_cost: 5.0,
            diffusion,
            price: PriceConfig::Ces { wealth: 3.0, growth: 0.01, elasticity: 1.2, substitution: 0.2 },
        },
        initial: BumpConfig { center: 3.0, rate: 0.2, floor: 0.7 },
        terminal: TerminalConfig::Zero,
        solver: SolverConfig::default(),
        output: OutputConfig { directory: format!("out/{name}").into(), ..OutputConfig::default() },
        seed: None,
    }
}

fn oil(name: &str) -> RunConfig {
    RunConfig {
        name: name.to_string(),
        grid: GridConfig { length: 60.0, horizon: 150.0, space_cells: 600, time_steps: 1500 },
        model: ModelConfig {
            discount: 0.05,
            linear_cost: 10.0,
            quadratic_cost: 50.0,
            diffusion: DiffusionConfig::Geometric { sigma: 0.05 },
            price: PriceConfig::Ces { wealth: 40.0, growth: 0.02, elasticity: 1.2, substitution: 0.1 },
        },
        initial: BumpConfig { center: 30.0, rate: 0.0008, floor: 0.7 },
        terminal: TerminalConfig::Zero,
        solver: SolverConfig::default(),
        output: OutputConfig { directory: format!("out/{name}").into(), ..OutputConfig::default() },
        seed: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test1_uses_published_parameters() {
        let cfg = preset("test1-bm").unwrap();
        assert_eq!(cfg.model.quadratic_cost, 5.0);
        assert_eq!(cfg.model.linear_cost, 2.0);
        let p = cfg.build().unwrap();
        assert!((p.grid.h() - 0.02).abs() < 1e-15);
        assert!((p.grid.dt() - 0.0075).abs() < 1e-15);
    }

    #[test]
    fn oil_grid_has_unit_tenth_steps() {
        let p = preset("oil").unwrap().build().unwrap();
        assert!((p.grid.h() - 0.1).abs() < 1e-12);
        assert!((p.grid.dt() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn ci_variants_shrink_the_grid_only() {
        let full = preset("oil").unwrap();
        let ci = preset("oil-ci").unwrap();
        assert_eq!((ci.grid.space_cells, ci.grid.time_steps), (120, 300));
        assert_eq!(full.model, ci.model);
        let t = preset("test1-gbm-ci").unwrap();
        assert_eq!((t.grid.space_cells, t.grid.time_steps), (100, 400));
    }

    #[test]
    fn unknown_preset_lists_choices() {
        match preset("bogus") {
            Err(RunError::Usage(msg)) => assert!(msg.contains("test1-bm")),
            other => panic!("expected usage error, got {other:?}"),
        }
        assert!(preset("bogus-ci").is_err());
    }
}
