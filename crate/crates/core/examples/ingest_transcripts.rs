//! Parse the two raw transcript encodings and round-trip a corpus through
//! the canonical line-delimited format.
//!
//!     cargo run --example ingest_transcripts

use std::fs;

use speakerbench::corpus::{
    ingest_dir, parse_bbn, parse_ldc, read_canonical, render_raw, write_canonical, RawFormat,
};

const BBN: &str = "\
L: Hi.  [LAUGH] So, do you have pets?
R: Ah, no.
L: Oh. I have three dogs.
L: -- and he's eighty pounds, big guy.
R: Wow.";

const LDC: &str = "\
A: hi [laughter] so do you have pets
B: (( ah no ))
A: oh i have three dogs and he's eighty pounds big guy
B: wow";

fn main() -> speakerbench::Result<()> {
    let [left, right] = parse_bbn(BBN, "fe_03_00001", "pets")?;
    println!("BBN: {} left / {} right utterances", left.len(), right.len());
    for u in &left.utterances {
        println!("  L{} {}", u.index, u.text);
    }

    // LDC groups a speaker's speech more coarsely, so counts differ.
    let [a, b] = parse_ldc(LDC, "fe_03_00001", "pets")?;
    println!("LDC: {} left / {} right utterances", a.len(), b.len());
    println!("  B0 {}", b.utterances[0].text);

    let err = parse_ldc("A: only one side", "c", "t").unwrap_err();
    println!("one-sided call: {err}");

    let dir = std::env::temp_dir().join(format!("speakerbench-ingest-{}", std::process::id()));
    fs::create_dir_all(&dir).map_err(|e| speakerbench::Error::io(&dir, e))?;
    let write = |name: &str, text: &str| {
        let p = dir.join(name);
        fs::write(&p, text).map_err(|e| speakerbench::Error::io(&p, e))
    };
    write("calls.tsv", "# conversation_id\ttopic\tleft\tright\nc1\tpets\tspk_a\tspk_b\nc2\tfood\tspk_a\tspk_c\n")?;
    write("c1.txt", BBN)?;
    write("c2.txt", &render_raw(&left, &right, RawFormat::Bbn))?;
    let corpus = ingest_dir(&dir, RawFormat::Bbn)?;
    println!(
        "ingested {} conversations, speakers {:?}",
        corpus.conversation_count(),
        corpus.speakers()
    );

    let path = dir.join("corpus.jsonl");
    write_canonical(&corpus, &path)?;
    let back = read_canonical(&path)?;
    println!("canonical round trip preserves sides: {}", back.sides() == corpus.sides());
    fs::remove_dir_all(&dir).ok();
    Ok(())
}
