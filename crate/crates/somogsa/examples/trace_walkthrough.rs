//! Anatomy of a run: phase transitions and step classifications in the
//! trace, plus JSON-lines export.
//!
//! Run with: `cargo run --example trace_walkthrough`

use somogsa::biobj::BiObjectiveProblem;
use somogsa::mogsa::{self, MogsaConfig};
use somogsa::problems::{self, DEFAULT_SPHERE_CENTER};

fn main() -> somogsa::Result<()> {
    let bi = BiObjectiveProblem::new(problems::bimodal_example(), DEFAULT_SPHERE_CENTER.to_vec())?;
    let res = mogsa::run(&bi, &[2.5, 2.0], &MogsaConfig::default(), 200_000)?;

    // print one line per phase change or notable event, eliding plain moves
    let mut last_phase = None;
    for ev in &res.trace {
        let notable = !matches!(ev.note, mogsa::EventNote::Move | mogsa::EventNote::BisectionProbe);
        if Some(ev.phase) != last_phase || notable {
            println!(
                "step {:>4}  {:<13} {:<15} x = [{:+.4}, {:+.4}]  f1 = {:+.5}",
                ev.step,
                format!("{:?}", ev.phase),
                format!("{:?}", ev.note),
                ev.x[0],
                ev.x[1],
                ev.f1
            );
            last_phase = Some(ev.phase);
        }
    }

    let path = std::env::temp_dir().join("bimodal_trace.jsonl");
    mogsa::write_trace_jsonl(&res.trace, std::fs::File::create(&path)?)?;
    println!(
        "\n{} events total; full trace written to {}",
        res.trace.len(),
        path.display()
    );
    Ok(())
}
