use std::fmt::Write;

use super::schedulers::Matching;
use crate::error::{Error, Result};

/// One row of the text record: a CVL, its CL and its NCVLs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupRecord {
    pub cvl: usize,
    pub cl: usize,
    pub ncvls: Vec<usize>,
}

/// Line-oriented record of a matching, one row per CL in priority order:
/// `cvl<TAB>cl<TAB>j1,j2,...` with `-` for an empty group.
pub fn matching_record(matching: &Matching) -> String {
    let mut out = String::new();
    for &i in &matching.priority.alpha {
        let ncvls = if matching.beta[i].is_empty() {
            "-".to_string()
        } else {
            matching.beta[i].iter().map(usize::to_string).collect::<Vec<_>>().join(",")
        };
        writeln!(out, "{}\t{}\t{}", i, matching.priority.cl_of_cvl[i], ncvls).unwrap();
    }
    out
}

pub fn parse_record(text: &str) -> Result<Vec<GroupRecord>> {
    let bad = |line: &str| Error::Config(format!("malformed matching record line {line:?}"));
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let mut fields = line.split('\t');
            let (Some(cvl), Some(cl), Some(ncvls), None) = (fields.next(), fields.next(), fields.next(), fields.next())
            else {
                return Err(bad(line));
            };
            let ncvls = if ncvls == "-" {
                Vec::new()
            } else {
                ncvls.split(',').map(|s| s.parse().map_err(|_| bad(line))).collect::<Result<_>>()?
            };
            Ok(GroupRecord {
                cvl: cvl.parse().map_err(|_| bad(line))?,
                cl: cl.parse().map_err(|_| bad(line))?,
                ncvls,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::PriorityOrder;

    #[test]
    fn round_trip() {
        let m = Matching {
            priority: PriorityOrder {
                alpha: vec![1, 0],
                cl_of_cvl: vec![0, 1],
                assigned_gain: vec![3.0, 5.0],
            },
            beta: vec![vec![4, 2], vec![]],
            admitted: vec![false, false, true, false, true],
            standalone_infeasible: vec![false, false],
        };
        let text = matching_record(&m);
        assert_eq!(text, "1\t1\t-\n0\t0\t4,2\n");
        let rows = parse_record(&text).unwrap();
        assert_eq!(rows[1], GroupRecord { cvl: 0, cl: 0, ncvls: vec![4, 2] });
        assert!(rows[0].ncvls.is_empty());
        assert!(parse_record("1\t2\n").is_err());
    }
}
