// Scratch diagnostics for the distributed scheduler dynamics.

use linksched::consensus::disagreement;
use linksched::dissched::{ConsensusMode, DisSched, DisSchedParams};
use linksched::queueing::{ArrivalProcess, QueueLedger};
use linksched::topology::InterferenceGraph;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let graph = args.get(1).map(String::as_str).unwrap_or("ring");
    let rounds: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(10);
    let slots: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(200_000);
    let eps: f64 = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(0.01);
    let alpha: f64 = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(50.0);
    let settle: f64 = args.get(6).and_then(|s| s.parse().ok()).unwrap_or(1e-3);
    let seed: u64 = args.get(7).and_then(|s| s.parse().ok()).unwrap_or(1);
    let q: f64 = args.get(8).and_then(|s| s.parse().ok()).unwrap_or(0.25);
    let t_u: u64 = args.get(9).and_then(|s| s.parse().ok()).unwrap_or(2000);

    let g = match graph {
        "star" => InterferenceGraph::star(7).unwrap(),
        _ => InterferenceGraph::ring(6).unwrap(),
    };
    let n = g.n();
    let params = DisSchedParams {
        epsilon: eps,
        alpha,
        settle_threshold: settle,
        decision_rule: linksched::csma::DecisionRule::new(q).unwrap(),
        update_interval: t_u,
        consensus: if rounds == 0 {
            ConsensusMode::Exact
        } else {
            ConsensusMode::Gossip { rounds }
        },
        ..Default::default()
    };
    let mut sched = DisSched::new(&g, params).unwrap();
    let proc = ArrivalProcess::bernoulli(vec![0.475; n]).unwrap();
    let mut ledger = QueueLedger::new(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut fails = 0u64;
    let mut spread_sum = 0.0;
    let mut spread_max: f64 = 0.0;
    let mut samples = 0u64;
    let mut tail_agree = 0u64;
    for t in 1..=slots {
        ledger.record_arrivals(&proc.draw(&mut rng));
        let out = sched.slot_step(&ledger, &mut rng);
        if out.decision.failed != 0 {
            fails += 1;
        }
        if t > slots / 2 && out.decision.all_agree {
            tail_agree += 1;
        }
        ledger.apply_service(&out.decision.success_flags(n));
        if t > slots / 2 {
            // spread of weight copies across links, worst candidate
            let mut worst: f64 = 0.0;
            for idx in 0..=n {
                worst = worst.max(disagreement(sched.weight_copies(idx)));
            }
            spread_sum += worst;
            spread_max = spread_max.max(worst);
            samples += 1;
        }
        if t % (slots / 10) == 0 {
            println!(
                "t={t} gap={:.4} gap_spread={:.2e} q_max={} agree={:.4} basis_changes={}",
                sched.gap(),
                sched.gap_disagreement(),
                ledger.max_queue(),
                sched.stats().agreement_rate(),
                sched.stats().basis_changes,
            );
        }
        if std::env::var("PROBE_BOUNDARY").is_ok() && t % 2000 == 0 && t <= 40_000 {
            let prices = sched.prices().to_vec();
            let weights: Vec<f64> = (0..=n)
                .map(|idx| sched.candidate_schedule(idx).weight(&prices))
                .collect();
            let min_basis = weights[..n].iter().cloned().fold(f64::INFINITY, f64::min);
            println!(
                "  boundary t={t} gap={:.3} csma={} cand_w={:.3} min_basis_w={:.3} queues={:?}",
                sched.gap(),
                sched.csma_schedule().to_bitstring(),
                weights[n],
                min_basis,
                ledger.queues()
            );
        }
    }
    println!(
        "final: gap_stability={:.4} fails={} mean_spread={:.3e} max_spread={:.3e} agree={:.4} tail_agree={:.4}",
        ledger
            .rate_stability_gap(&vec![0.475; n])
            .unwrap(),
        fails,
        spread_sum / samples as f64,
        spread_max,
        sched.stats().agreement_rate(),
        tail_agree as f64 / (slots - slots / 2) as f64
    );
    let prices = sched.prices();
    println!("prices={prices:?}");
    let basis: Vec<String> = (0..n)
        .map(|j| sched.basis().column(j).to_bitstring())
        .collect();
    println!("basis={basis:?} candidate={}", sched.candidate().to_bitstring());
}
