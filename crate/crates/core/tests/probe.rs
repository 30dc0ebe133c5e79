// Scratch probe for FD-convergence tuning; removed before finalizing.
use jharmonic_core::geometry::round_sphere;
use jharmonic_core::identities::{check_bochner, check_weitzenboeck};
use jharmonic_core::sampling::{random_form, rng_from, sample_points, TrigProfile};

#[test]
#[ignore]
fn probe_convergence() {
    let base = round_sphere(2).unwrap().without_exact();
    for (label, profile) in [
        ("default f2 a0.5", TrigProfile { terms: 3, max_freq: 2, amplitude: 0.5 }),
        ("f3 a0.5", TrigProfile { terms: 3, max_freq: 3, amplitude: 0.5 }),
        ("f4 a0.4", TrigProfile { terms: 3, max_freq: 4, amplitude: 0.4 }),
        ("f5 a0.3", TrigProfile { terms: 3, max_freq: 5, amplitude: 0.3 }),
    ] {
        let mut rng = rng_from(1);
        let coarse = base.with_fd_step(1e-4);
        let fine = base.with_fd_step(5e-5);
        let points = sample_points(&coarse, 30, &mut rng);
        let mut ratios_max = Vec::new();
        let mut ratios_mean = Vec::new();
        for seed in 0..5u64 {
            let w_c = random_form(&coarse, 1, seed, profile);
            let w_f = random_form(&fine, 1, seed, profile);
            let rc = check_weitzenboeck(&w_c, &points, 1.0, seed).unwrap();
            let rf = check_weitzenboeck(&w_f, &points, 1.0, seed).unwrap();
            ratios_max.push(rc.max_residual / rf.max_residual);
            ratios_mean.push(rc.mean_residual / rf.mean_residual);
            if seed == 0 {
                println!(
                    "  W [{label}] seed0: coarse max {:.3e} mean {:.3e} | fine max {:.3e} mean {:.3e}",
                    rc.max_residual, rc.mean_residual, rf.max_residual, rf.mean_residual
                );
            }
        }
        println!(
            "W [{label}] max-ratio {:?}",
            ratios_max.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>()
        );
        println!(
            "W [{label}] mean-ratio {:?}",
            ratios_mean.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>()
        );
    }

    let mk = round_sphere(2).unwrap().without_exact();
    for (label, amp, freq) in [
        ("a0.25 f7", 0.25, 7u32),
        ("a0.3 f7", 0.3, 7),
        ("a0.25 f8", 0.25, 8),
        ("a0.3 f8", 0.3, 8),
    ] {
        let coarse = mk.with_fd_step(1e-4);
        let fine = mk.with_fd_step(5e-5);
        for seed in 1..=6u64 {
            let mut rng = rng_from(seed.wrapping_mul(97));
            let points = sample_points(&coarse, 30, &mut rng);
            let jc = jharmonic_core::jstructure::make_exp_conjugated(&coarse, seed, amp, freq).unwrap();
            let jf = jharmonic_core::jstructure::make_exp_conjugated(&fine, seed, amp, freq).unwrap();
            let rc = &check_bochner(&jc, &points, 1.0, seed).unwrap()[0];
            let rf = &check_bochner(&jf, &points, 1.0, seed).unwrap()[0];
            println!(
                "B sphere2 [{label}] seed {seed}: coarse max {:.3e} | ratios max {:.2} mean {:.2}",
                rc.max_residual,
                rc.max_residual / rf.max_residual,
                rc.mean_residual / rf.mean_residual
            );
        }
    }
}
