//! Parsing of budget lists (`--k`) and policy lists (`--policy`): comma
//! separated entries, where budget entries may also be inclusive `a..b`
//! spans (`2,5..8` means 2, 5, 6, 7, 8).

use seclab_core::policy::PolicyKind;

use crate::error::{usage, CliError};

fn parse_usize(token: &str, context: &str) -> Result<usize, CliError> {
    token
        .parse()
        .map_err(|_| usage(format!("{context}: expected a positive integer, got {token:?}")))
}

/// Parses a budget list, expanding `a..b` spans inclusively.
pub fn parse_k_list(input: &str) -> Result<Vec<usize>, CliError> {
    let mut ks = Vec::new();
    for part in input.split(',') {
        let part = part.trim();
        if part.is_empty() {
            return Err(usage(format!("empty entry in k list {input:?}")));
        }
        match part.split_once("..") {
            Some((lo, hi)) => {
                let lo = parse_usize(lo.trim(), "k span start")?;
                let hi = parse_usize(hi.trim(), "k span end")?;
                if lo > hi {
                    return Err(usage(format!("k span {part:?} runs backwards")));
                }
                ks.extend(lo..=hi);
            }
            None => ks.push(parse_usize(part, "k list entry")?),
        }
    }
    Ok(ks)
}

/// Parses a comma-separated list of policy names.
pub fn parse_policy_list(input: &str) -> Result<Vec<PolicyKind>, CliError> {
    input
        .split(',')
        .map(|part| {
            let part = part.trim();
            part.parse::<PolicyKind>().map_err(|e| usage(e.to_string()))
        })
        .collect()
}

/// Parses exactly one policy name.
pub fn parse_policy(input: &str) -> Result<PolicyKind, CliError> {
    let list = parse_policy_list(input)?;
    match list.as_slice() {
        [one] => Ok(*one),
        _ => Err(usage(format!("expected exactly one policy, got {input:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commas_and_spans_mix() {
        assert_eq!(parse_k_list("2,3,4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_k_list("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_k_list("2, 5..7, 10").unwrap(), vec![2, 5, 6, 7, 10]);
        assert_eq!(parse_k_list("3..3").unwrap(), vec![3]);
    }

    #[test]
    fn malformed_lists_are_usage_errors() {
        assert!(parse_k_list("").is_err());
        assert!(parse_k_list("2,,3").is_err());
        assert!(parse_k_list("5..2").is_err());
        assert!(parse_k_list("a..b").is_err());
        assert!(parse_k_list("-1").is_err());
    }

    #[test]
    fn policy_lists_parse_canonical_names() {
        assert_eq!(
            parse_policy_list("virtual,virtual+").unwrap(),
            vec![PolicyKind::Virtual, PolicyKind::VirtualPlus]
        );
        assert!(parse_policy_list("virtual,bogus").is_err());
        assert_eq!(parse_policy("single-ref").unwrap(), PolicyKind::SingleRef);
        assert!(parse_policy("virtual,opt").is_err());
    }
}
