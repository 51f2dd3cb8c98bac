use predwave::cartography::{hcrit_vs_d, sweep_plane, CurveShape, Range, SweepRecord, SweepSpec};
use predwave::pde::{run, Grid, Outcome, SimConfig};
use predwave::waves::{zone_of, Zone};
use predwave::Params;

fn etw_speed(nx: usize) -> f64 {
    let p = Params::new(2.0, 5.6, 4.0, 1.0, 1.0).unwrap();
    let cfg = SimConfig {
        grid: Grid { length: 200.0, nx },
        t_end: 400.0,
        ..SimConfig::default()
    };
    let out = run(&p, &cfg).unwrap();
    out.front.fitted_speed.unwrap()
}

#[test]
fn retreating_front_speed_converges_under_refinement() {
    let coarse = etw_speed(1024);
    let fine = etw_speed(2048);
    assert!(fine < 0.0);
    assert!(((coarse - fine) / fine).abs() < 0.05, "coarse {coarse}, fine {fine}");
}

fn invaded(rec: &SweepRecord) -> bool {
    match rec.outcome {
        Some(Outcome::Invasion) => true,
        Some(Outcome::Undetermined) => rec.front_speed.is_some_and(|c| c > 0.0),
        Some(_) => false,
        None => rec.zone == Zone::Invasion,
    }
}

#[test]
fn coarse_plane_sweep_has_a_monotone_boundary() {
    let spec = SweepSpec {
        e_range: Range { lo: 1.5, hi: 5.0, steps: 8 },
        h_range: Range { lo: 2.0, hi: 9.0, steps: 8 },
        alpha: 4.0,
        r: 1.0,
        d: 1.0,
        sim: SimConfig {
            grid: Grid { length: 200.0, nx: 512 },
            t_end: 600.0,
            ..SimConfig::default()
        },
        refine: None,
    };
    let records = sweep_plane(&spec).unwrap();
    assert_eq!(records.len(), 64);
    let mut boundaries = Vec::new();
    for row in records.chunks(8) {
        let e = row[0].e;
        let inv: Vec<bool> = row.iter().map(invaded).collect();
        let flips = inv.windows(2).filter(|w| w[0] != w[1]).count();
        assert!(flips == 1 && !inv[0] && inv[7], "E = {e}: {inv:?}");
        boundaries.push(inv.iter().position(|&b| b).unwrap());
        for rec in row {
            let (zone, _) = zone_of(rec.e, rec.h, 4.0).unwrap();
            if zone == Zone::UniformExtinction {
                assert!(!invaded(rec), "E = {e}, h = {}", rec.h);
            }
        }
    }
    let up = boundaries.windows(2).all(|w| w[0] <= w[1]);
    let down = boundaries.windows(2).all(|w| w[0] >= w[1]);
    assert!(up || down, "{boundaries:?}");
}

#[test]
fn hcrit_is_essentially_decreasing_in_d_for_fast_predators() {
    let cfg = SimConfig {
        grid: Grid { length: 200.0, nx: 512 },
        t_end: 600.0,
        ..SimConfig::default()
    };
    let curve = hcrit_vs_d(2.0, 4.0, 1.0, &[0.1, 1.0, 10.0], &cfg).unwrap();
    let values: Vec<f64> = curve.points.iter().map(|p| p.h_crit.unwrap()).collect();
    assert!(values.windows(2).all(|w| w[1] <= w[0] + 0.05), "{values:?}");
    assert_eq!(curve.shape, CurveShape::Decreasing, "{values:?}");
}
