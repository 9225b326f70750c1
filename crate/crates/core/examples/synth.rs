//! Writes a synthetic biased corpus as JSON Lines.
//!
//! cargo run -p fakeaudit --example synth -- corpus.jsonl [seed]

use fakeaudit::corpus::write_corpus;
use fakeaudit::synthetic::{synthetic_corpus, SyntheticSpec};

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "synthetic.jsonl".into());
    let seed = args.next().map(|s| s.parse().expect("seed must be an integer")).unwrap_or(0);
    let corpus = synthetic_corpus(&SyntheticSpec { seed, ..Default::default() }, "synthetic").expect("valid spec");
    write_corpus(&corpus, &path).expect("writable output path");
    let c = corpus.subgroup_counts();
    println!("{path}: HR {} HF {} MF {} MR {}", c.hr, c.hf, c.mf, c.mr);
}
