/// Emoticons removed by Reddit-like normalization (list version 1, 64 entries).
/// Matching is on whole whitespace-delimited tokens and is case sensitive.
pub const EMOTICONS: [&str; 64] = [
    ":)", ":-)", ":(", ":-(", ":D", ":-D", ";)", ";-)", ":P", ":-P", ":p", ":-p", ":O", ":-O",
    ":o", ":-o", ":/", ":-/", ":\\", ":|", ":-|", ":'(", ":'-(", ":')", "XD", "xD", "X-D", "=)",
    "=(", "=D", "=P", "<3", "</3", ":*", ":-*", ";P", ";D", ":3", ":S", ":-S", ">:(", ">:)",
    "B)", "B-)", "8)", "8-)", "^_^", "^^", "-_-", "o_O", "O_o", "o.O", "T_T", ";_;", "(:", "):",
    "D:", ":]", ":[", ":}", ":{", ":>", ":<", "xP",
];

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn sixty_four_distinct_ascii() {
        let set: BTreeSet<_> = EMOTICONS.iter().collect();
        assert_eq!(set.len(), 64);
        assert!(EMOTICONS.iter().all(|e| e.is_ascii()));
    }
}
