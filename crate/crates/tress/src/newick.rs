//! Newick parsing and serialization for unrooted topologies.
//!
//! Input trees may be rooted, multifurcating, and carry branch lengths or
//! internal node labels; everything except the leaf label structure is
//! discarded and rooted inputs are silently unrooted. Labels are unquoted
//! character runs (no whitespace, none of `(),:;`) taken literally.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::taxa::TaxonMap;
use crate::topology::{CladeItem, Split, Topology};

#[derive(Debug)]
enum Event {
    Open,
    Close,
    Leaf(usize), // index into the label list
}

struct Tokenizer<'a> {
    rest: &'a str,
    events: Vec<Event>,
    labels: Vec<String>,
}

impl<'a> Tokenizer<'a> {
    fn skip_ws(&mut self) {
        self.rest = self.rest.trim_start();
    }

    fn take_label(&mut self) -> Option<String> {
        let end = self
            .rest
            .find(|c: char| c.is_whitespace() || "(),:;".contains(c))
            .unwrap_or(self.rest.len());
        if end == 0 {
            return None;
        }
        let (label, rest) = self.rest.split_at(end);
        self.rest = rest;
        Some(label.to_string())
    }

    /// Consume an optional `[label][:length]` suffix (after a leaf position
    /// this is just `[:length]`; after `)` the label is an internal name).
    fn skip_length(&mut self) -> Result<()> {
        self.skip_ws();
        if let Some(stripped) = self.rest.strip_prefix(':') {
            self.rest = stripped.trim_start();
            let end = self
                .rest
                .find(|c: char| c.is_whitespace() || "(),;".contains(c))
                .unwrap_or(self.rest.len());
            let (num, rest) = self.rest.split_at(end);
            if num.parse::<f64>().is_err() {
                return Err(Error::Newick(alloc::format!(
                    "invalid branch length {num:?}"
                )));
            }
            self.rest = rest;
        }
        Ok(())
    }
}

fn tokenize(text: &str) -> Result<(Vec<Event>, Vec<String>)> {
    let mut tk = Tokenizer {
        rest: text,
        events: Vec::new(),
        labels: Vec::new(),
    };
    let mut depth: usize = 0;
    // true when the position right after a subtree (leaf or closed group)
    let mut after_subtree = false;
    let mut terminated = false;

    loop {
        tk.skip_ws();
        let Some(c) = tk.rest.chars().next() else {
            break;
        };
        if terminated {
            return Err(Error::Newick("trailing characters after ';'".into()));
        }
        match c {
            '(' => {
                if after_subtree {
                    return Err(Error::Newick("unexpected '('".into()));
                }
                tk.rest = &tk.rest[1..];
                tk.events.push(Event::Open);
                depth += 1;
            }
            ')' => {
                if !after_subtree || depth == 0 {
                    return Err(Error::Newick("unexpected ')'".into()));
                }
                tk.rest = &tk.rest[1..];
                depth -= 1;
                tk.skip_ws();
                let _internal_label = tk.take_label();
                tk.skip_length()?;
                tk.events.push(Event::Close);
                after_subtree = true;
            }
            ',' => {
                if !after_subtree || depth == 0 {
                    return Err(Error::Newick("unexpected ','".into()));
                }
                tk.rest = &tk.rest[1..];
                after_subtree = false;
            }
            ';' => {
                if !after_subtree || depth != 0 {
                    return Err(Error::Newick("unexpected ';'".into()));
                }
                tk.rest = &tk.rest[1..];
                terminated = true;
            }
            ':' => return Err(Error::Newick("unexpected ':'".into())),
            _ => {
                if after_subtree {
                    return Err(Error::Newick(alloc::format!(
                        "unexpected label near {:?}",
                        &tk.rest[..tk.rest.len().min(12)]
                    )));
                }
                let label = tk
                    .take_label()
                    .ok_or_else(|| Error::Newick("empty label".into()))?;
                tk.skip_length()?;
                tk.events.push(Event::Leaf(tk.labels.len()));
                tk.labels.push(label);
                after_subtree = true;
            }
        }
    }
    if !terminated {
        return Err(Error::Newick("missing terminating ';'".into()));
    }
    Ok((tk.events, tk.labels))
}

/// Parse one Newick string into a canonical unrooted topology.
///
/// With `taxa` supplied, leaf labels must be exactly that map's label set;
/// otherwise a new map is created with the labels in sorted order.
pub fn parse_newick(text: &str, taxa: Option<&Arc<TaxonMap>>) -> Result<Topology> {
    let (events, labels) = tokenize(text)?;
    if labels.len() < 3 {
        return Err(Error::TooFewTaxa(labels.len()));
    }

    let map: Arc<TaxonMap> = match taxa {
        Some(m) => {
            if labels.len() != m.len() {
                return Err(Error::TaxonMismatch);
            }
            m.clone()
        }
        None => TaxonMap::from_labels_sorted(labels.iter())?,
    };
    let n = map.len();

    let mut indices = Vec::with_capacity(labels.len());
    let mut seen = alloc::vec![false; n];
    for label in &labels {
        let idx = match map.position(label) {
            Some(i) => i,
            None => {
                return Err(if taxa.is_some() {
                    Error::TaxonMismatch
                } else {
                    Error::Newick(alloc::format!("unknown label {label:?}"))
                })
            }
        };
        if seen[idx as usize] {
            return Err(Error::DuplicateTaxon(label.clone()));
        }
        seen[idx as usize] = true;
        indices.push(idx);
    }

    // replay the structure, collecting the leaf set under each internal node
    let mut stack: Vec<Vec<u32>> = alloc::vec![Vec::new()];
    let mut splits: Vec<Split> = Vec::new();
    for ev in &events {
        match ev {
            Event::Open => stack.push(Vec::new()),
            Event::Leaf(i) => stack.last_mut().unwrap().push(indices[*i]),
            Event::Close => {
                let members = stack.pop().expect("balanced parens");
                if members.is_empty() {
                    return Err(Error::Newick("empty group".into()));
                }
                // the outermost group is the root: its "split" is trivial
                if stack.len() > 1 {
                    let s = Split::from_members(&members, n);
                    if s.is_nontrivial(n) {
                        splits.push(s);
                    }
                }
                stack.last_mut().unwrap().extend(members);
            }
        }
    }
    debug_assert_eq!(stack.len(), 1);

    Topology::new(map, splits)
}

fn render_item(t: &Topology, item: CladeItem, children: &[Vec<CladeItem>], out: &mut String) {
    match item {
        CladeItem::Leaf(taxon) => out.push_str(t.taxa().name(taxon)),
        CladeItem::Clade(i) => {
            out.push('(');
            for (k, child) in children[i].iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                render_item(t, *child, children, out);
            }
            out.push(')');
        }
    }
}

/// Serialize a topology to Newick, without branch lengths. The output is
/// deterministic given the taxon map order and round-trips through
/// [`parse_newick`].
pub fn serialize_newick(t: &Topology) -> String {
    let structure = t.clade_structure();
    let mut out = String::new();
    out.push('(');
    for (k, item) in structure.root.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        render_item(t, *item, &structure.children, &mut out);
    }
    out.push_str(");");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_taxon_tree_has_one_split() {
        let t = parse_newick("(A,B,(C,D));", None).unwrap();
        assert_eq!(t.splits().len(), 1);
        let expect = Split::from_members(&[2, 3], 4);
        assert_eq!(t.splits()[0], expect);
    }

    #[test]
    fn star_has_no_splits() {
        let t = parse_newick("(A,B,C);", None).unwrap();
        assert!(t.splits().is_empty());
        // the 3-taxon star is the unique (and fully resolved) topology
        assert!(t.is_binary());
        let five = parse_newick("(A,B,C,D,E);", None).unwrap();
        assert!(five.splits().is_empty());
        assert!(!five.is_binary());
    }

    #[test]
    fn label_order_does_not_matter() {
        let a = parse_newick("((A,B),(C,D),E);", None).unwrap();
        let b = parse_newick("(E,(D,C),(B,A));", None).unwrap();
        assert!(a.same_taxa(&b));
        assert_eq!(a, b);
    }

    #[test]
    fn rooted_input_is_unrooted() {
        let rooted = parse_newick("((A,B),(C,D));", None).unwrap();
        let unrooted = parse_newick("(A,B,(C,D));", None).unwrap();
        assert_eq!(rooted, unrooted);
        assert_eq!(rooted.splits().len(), 1);
    }

    #[test]
    fn branch_lengths_and_internal_labels_discarded() {
        let t = parse_newick("((A:0.1,B:0.2)ab:0.3,(C:1e-4,D:2)cd:0.5);", None).unwrap();
        let plain = parse_newick("((A,B),(C,D));", None).unwrap();
        assert_eq!(t, plain);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_newick("(A,B;", None), Err(Error::Newick(_))));
        assert!(matches!(
            parse_newick("(A,B,(C,D))", None),
            Err(Error::Newick(_))
        ));
        assert!(matches!(
            parse_newick("(A,,B,C);", None),
            Err(Error::Newick(_))
        ));
        assert!(matches!(
            parse_newick("(A,B,A);", None),
            Err(Error::DuplicateTaxon(_))
        ));
        assert!(matches!(
            parse_newick("(A,B);", None),
            Err(Error::TooFewTaxa(2))
        ));
        assert!(matches!(
            parse_newick("(A,B,(C,D):bad);", None),
            Err(Error::Newick(_))
        ));
    }

    #[test]
    fn label_set_must_match_supplied_map() {
        let map = TaxonMap::new(["A", "B", "C", "D"]).unwrap();
        assert!(parse_newick("(A,B,(C,D));", Some(&map)).is_ok());
        assert!(matches!(
            parse_newick("(A,B,(C,E));", Some(&map)),
            Err(Error::TaxonMismatch)
        ));
        assert!(matches!(
            parse_newick("(A,B,C);", Some(&map)),
            Err(Error::TaxonMismatch)
        ));
    }

    #[test]
    fn serialize_star() {
        let t = parse_newick("(B,C,A);", None).unwrap();
        assert_eq!(serialize_newick(&t), "(A,B,C);");
    }

    #[test]
    fn serialize_round_trips() {
        for text in [
            "(A,B,(C,D));",
            "((A,B),(C,D),E);",
            "(((A,B),C),((D,E),(F,(G,H))));",
            "(A,B,C,(D,E));",
        ] {
            let t = parse_newick(text, None).unwrap();
            let s = serialize_newick(&t);
            let back = parse_newick(&s, Some(t.taxa())).unwrap();
            assert_eq!(t, back, "round trip failed for {text} -> {s}");
        }
    }

    #[test]
    fn unresolved_consensus_renders_multifurcation() {
        // only split {D,E} present: the A/B/C block stays unresolved
        let taxa = TaxonMap::new(["A", "B", "C", "D", "E"]).unwrap();
        let t = Topology::new(taxa, alloc::vec![Split::from_members(&[3, 4], 5)]).unwrap();
        assert_eq!(serialize_newick(&t), "(A,B,C,(D,E));");
    }
}
