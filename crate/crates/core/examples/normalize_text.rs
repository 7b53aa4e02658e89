//! Transcript normalization: LDC style, annotation stripping, written-text
//! cleanup, intro trimming and utterance windows.
//!
//!     cargo run --example normalize_text

use speakerbench::corpus::{parse_bbn, Corpus, Provenance};
use speakerbench::normalize::{
    normalize_ldc_style, normalize_reddit_like, prepare_corpus, strip_annotations, trim_intro, truncate_window, Style,
    WindowMode,
};

fn main() -> speakerbench::Result<()> {
    for s in ["he's eighty pounds, big guy.", "I ha- --", "Hi.  [LAUGH] So, do you have pets?"] {
        println!("ldc      {s:?} -> {:?}", normalize_ldc_style(s));
    }
    for s in ["(( ah no ))", "hi [laughter] so", "stray )) delimiter"] {
        println!("strip    {s:?} -> {:?}", strip_annotations(s));
    }
    let post = "Check https://x.y :) &amp; more";
    println!("reddit   {post:?} -> {:?}", normalize_reddit_like(post));

    let raw: String = (0..12).map(|i| format!("L: Line {i}, okay?\nR: Sure [NOISE] {i}.\n")).collect();
    let [left, right] = parse_bbn(&raw, "c1", "t1")?;
    let trimmed = trim_intro(&left, 5);
    println!("trim 5 of {}: {} left, flagged {}", left.len(), trimmed.value.len(), trimmed.flagged);

    let last = truncate_window(&left, WindowMode::Last, 4)?;
    let idx: Vec<usize> = last.value.utterances.iter().map(|u| u.index).collect();
    println!("last 4 keeps original indices {idx:?}");

    let corpus = Corpus::new(vec![left, right], Provenance::FisherBbn)?;
    let (norm, _) = prepare_corpus(&corpus, 5, Some(Style::NormLdc))?;
    let side = &norm.sides()[1];
    println!("encoding lineage {:?}, first utterance {:?}", side.encoding, side.utterances[0].text);
    Ok(())
}
