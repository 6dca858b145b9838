//! Social and spatial diversity.
//!
//! Social diversity is the Shannon entropy of a user's message shares across
//! contacts, normalized by `ln k`. Spatial diversity is the entropy of the
//! shares across the contacts' areas, normalized by `ln A` for a fixed area
//! count `A`. Area values are unweighted means over the area's scored users.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graphs::CommGraph;
use crate::ingest::{AreaTable, Locations, UserId, UserRegistry};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Messages the user sent.
    Out,
    /// Messages sent and received, summed per contact.
    Union,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Social,
    Spatial,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiversityOptions {
    pub direction: Direction,
    /// Score users with a single contact (social diversity 0) or skip them.
    pub include_single_contact: bool,
    /// `A` in the spatial normalization.
    pub area_count: usize,
}

impl DiversityOptions {
    pub fn new(area_count: usize) -> Self {
        DiversityOptions {
            direction: Direction::Out,
            include_single_contact: true,
            area_count,
        }
    }
}

fn undefined(g: &CommGraph, i: UserId) -> Error {
    Error::UndefinedUser(format!("{} in graph {}", i.0, g.tag()))
}

/// `w(i,j) / Σ_j w(i,j)` over out-neighbors, in neighbor-id order.
pub fn contact_proportions(g: &CommGraph, i: UserId) -> Result<Vec<f64>> {
    let (_, w) = g.out_edges(i);
    if w.is_empty() {
        return Err(undefined(g, i));
    }
    let total: u64 = w.iter().map(|&x| x as u64).sum();
    Ok(w.iter().map(|&x| x as f64 / total as f64).collect())
}

/// Entropy of `props` (which sum to 1) divided by `ln(support)`. Zero
/// proportions contribute nothing.
pub fn normalized_entropy(props: &[f64], support: usize) -> f64 {
    if support < 2 {
        return 0.0;
    }
    let h: f64 = props.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum();
    if h <= 0.0 {
        // a single mass gives -0.0
        return 0.0;
    }
    (h / (support as f64).ln()).min(1.0)
}

fn social_from_weights(w: &[u32]) -> f64 {
    if w.len() < 2 {
        return 0.0;
    }
    if w.iter().all(|&x| x == w[0]) {
        return 1.0;
    }
    let total: u64 = w.iter().map(|&x| x as u64).sum();
    let props: Vec<f64> = w.iter().map(|&x| x as f64 / total as f64).collect();
    normalized_entropy(&props, w.len())
}

pub fn social_diversity(g: &CommGraph, i: UserId) -> Result<f64> {
    let (_, w) = g.out_edges(i);
    if w.is_empty() {
        return Err(undefined(g, i));
    }
    Ok(social_from_weights(w))
}

/// Message shares of `i` per contact area, sorted by area index; areas
/// without messages are omitted.
pub fn area_proportions(g: &CommGraph, i: UserId, locations: &Locations) -> Result<Vec<(u32, f64)>> {
    let (targets, w) = g.out_edges(i);
    if targets.is_empty() {
        return Err(undefined(g, i));
    }
    let mut per_area: Vec<(u32, u64)> = Vec::with_capacity(targets.len());
    for (&j, &wt) in targets.iter().zip(w) {
        let a = locations
            .area(j)
            .ok_or_else(|| Error::UnlocatedNeighbor(j.0.to_string()))?;
        per_area.push((a, wt as u64));
    }
    per_area.sort_unstable_by_key(|p| p.0);
    let mut merged: Vec<(u32, u64)> = Vec::with_capacity(per_area.len());
    for (a, wt) in per_area {
        match merged.last_mut() {
            Some((last, c)) if *last == a => *c += wt,
            _ => merged.push((a, wt)),
        }
    }
    let total: u64 = merged.iter().map(|p| p.1).sum();
    Ok(merged
        .into_iter()
        .map(|(a, c)| (a, c as f64 / total as f64))
        .collect())
}

pub fn spatial_diversity(g: &CommGraph, i: UserId, locations: &Locations, area_count: usize) -> Result<f64> {
    if area_count < 2 {
        return Err(Error::TooFewAreas {
            needed: 2,
            got: area_count,
        });
    }
    let props = area_proportions(g, i, locations)?;
    if props.len() > area_count {
        return Err(Error::Config(format!(
            "user {} reaches {} areas but the area count is {area_count}",
            i.0,
            props.len()
        )));
    }
    if props.len() == area_count && props.windows(2).all(|p| p[0].1 == p[1].1) {
        return Ok(1.0);
    }
    let p: Vec<f64> = props.into_iter().map(|(_, p)| p).collect();
    Ok(normalized_entropy(&p, area_count))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserDiversity {
    pub user: UserId,
    pub area: Option<u32>,
    pub social: f64,
    pub spatial: f64,
    /// Number of contacts.
    pub k: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaDiversity {
    pub area: u32,
    pub social: f64,
    pub spatial: f64,
    /// Scored users averaged into this row.
    pub users: usize,
}

/// Per-user and per-area diversity for one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct DiversityTable {
    pub tag: String,
    pub users: Vec<UserDiversity>,
    pub areas: Vec<AreaDiversity>,
}

impl DiversityTable {
    pub fn area(&self, area: u32) -> Option<&AreaDiversity> {
        self.areas
            .binary_search_by_key(&area, |a| a.area)
            .ok()
            .map(|i| &self.areas[i])
    }

    pub fn user(&self, user: UserId) -> Option<&UserDiversity> {
        self.users
            .binary_search_by_key(&user, |u| u.user)
            .ok()
            .map(|i| &self.users[i])
    }
}

/// Scores every user of `g` that has contacts under `opts.direction`.
pub fn compute_diversity(g: &CommGraph, locations: &Locations, opts: &DiversityOptions) -> Result<DiversityTable> {
    let sym;
    let graph = match opts.direction {
        Direction::Out => g,
        Direction::Union => {
            sym = g.symmetrized();
            &sym
        }
    };
    let users: Vec<UserDiversity> = graph
        .nodes()
        .par_iter()
        .filter_map(|&i| {
            let k = graph.out_degree(i);
            if k == 0 || (k == 1 && !opts.include_single_contact) {
                return None;
            }
            let row = social_diversity(graph, i).and_then(|social| {
                Ok(UserDiversity {
                    user: i,
                    area: locations.area(i),
                    social,
                    spatial: spatial_diversity(graph, i, locations, opts.area_count)?,
                    k,
                })
            });
            Some(row)
        })
        .collect::<Result<_>>()?;
    let areas = aggregate_areas(&users);
    Ok(DiversityTable {
        tag: g.tag().to_owned(),
        users,
        areas,
    })
}

fn aggregate_areas(users: &[UserDiversity]) -> Vec<AreaDiversity> {
    let mut acc: BTreeMap<u32, (f64, f64, usize)> = BTreeMap::new();
    for u in users {
        if let Some(a) = u.area {
            let e = acc.entry(a).or_insert((0.0, 0.0, 0));
            e.0 += u.social;
            e.1 += u.spatial;
            e.2 += 1;
        }
    }
    acc.into_iter()
        .map(|(area, (s, p, n))| AreaDiversity {
            area,
            social: s / n as f64,
            spatial: p / n as f64,
            users: n,
        })
        .collect()
}

/// Area index → mean diversity of the chosen kind.
pub fn area_diversity(table: &DiversityTable, kind: Kind) -> BTreeMap<u32, f64> {
    table
        .areas
        .iter()
        .map(|a| {
            (
                a.area,
                match kind {
                    Kind::Social => a.social,
                    Kind::Spatial => a.spatial,
                },
            )
        })
        .collect()
}

/// `graph_tag,level,id,d_social,d_spatial,k`. For area rows `k` is the
/// number of users averaged.
pub fn write_diversity_csv<W: Write>(
    tables: &[DiversityTable],
    users: &UserRegistry,
    areas: &AreaTable,
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["graph_tag", "level", "id", "d_social", "d_spatial", "k"])?;
    for t in tables {
        for u in &t.users {
            w.write_record([
                t.tag.as_str(),
                "user",
                users.name(u.user),
                &u.social.to_string(),
                &u.spatial.to_string(),
                &u.k.to_string(),
            ])?;
        }
        for a in &t.areas {
            w.write_record([
                t.tag.as_str(),
                "area",
                areas.areas()[a.area as usize].code.as_str(),
                &a.social.to_string(),
                &a.spatial.to_string(),
                &a.users.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(i: u32) -> UserId {
        UserId(i)
    }

    fn locs(areas: &[u32]) -> Locations {
        Locations::from_indices(areas.iter().map(|&a| Some(a)).collect())
    }

    #[test]
    fn proportions_from_weights() {
        let g = CommGraph::from_edges("t", 3, [(u(0), u(1), 3), (u(0), u(2), 1)]);
        assert_eq!(contact_proportions(&g, u(0)).unwrap(), vec![0.75, 0.25]);
        let g = CommGraph::from_edges("t", 2, [(u(0), u(1), 7)]);
        assert_eq!(contact_proportions(&g, u(0)).unwrap(), vec![1.0]);
        assert!(contact_proportions(&g, u(1)).is_err());
    }

    #[test]
    fn social_cases() {
        let g = CommGraph::from_edges("t", 5, (1..5).map(|j| (u(0), u(j), 2)));
        assert_eq!(social_diversity(&g, u(0)).unwrap(), 1.0);
        let g = CommGraph::from_edges("t", 2, [(u(0), u(1), 9)]);
        assert_eq!(social_diversity(&g, u(0)).unwrap(), 0.0);
        let g = CommGraph::from_edges("t", 3, [(u(0), u(1), 3), (u(0), u(2), 1)]);
        // -(0.75 ln 0.75 + 0.25 ln 0.25) / ln 2, evaluated to 16 digits offline
        let expected = 0.811_278_124_459_132_9;
        assert!((social_diversity(&g, u(0)).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn area_proportion_cases() {
        let g = CommGraph::from_edges("t", 3, [(u(0), u(1), 2), (u(0), u(2), 3)]);
        assert_eq!(area_proportions(&g, u(0), &locs(&[0, 5, 5])).unwrap(), vec![(5, 1.0)]);
        let g = CommGraph::from_edges("t", 3, [(u(0), u(1), 1), (u(0), u(2), 1)]);
        assert_eq!(
            area_proportions(&g, u(0), &locs(&[0, 1, 2])).unwrap(),
            vec![(1, 0.5), (2, 0.5)]
        );
        let unlocated = Locations::from_indices(vec![Some(0), Some(1), None]);
        assert!(matches!(
            area_proportions(&g, u(0), &unlocated),
            Err(Error::UnlocatedNeighbor(_))
        ));
    }

    #[test]
    fn spatial_cases() {
        let g = CommGraph::from_edges("t", 3, [(u(0), u(1), 2), (u(0), u(2), 3)]);
        assert_eq!(spatial_diversity(&g, u(0), &locs(&[0, 7, 7]), 44).unwrap(), 0.0);

        let g = CommGraph::from_edges("t", 45, (1..45).map(|j| (u(0), u(j), 1)));
        let areas: Vec<u32> = (0..45).map(|i| (i as u32).saturating_sub(1)).collect();
        assert_eq!(spatial_diversity(&g, u(0), &locs(&areas), 44).unwrap(), 1.0);

        let g = CommGraph::from_edges("t", 3, [(u(0), u(1), 1), (u(0), u(2), 1)]);
        let d = spatial_diversity(&g, u(0), &locs(&[0, 0, 1]), 4).unwrap();
        assert!((d - 0.5).abs() < 1e-15);
        assert!(matches!(
            spatial_diversity(&g, u(0), &locs(&[0, 0, 1]), 1),
            Err(Error::TooFewAreas { .. })
        ));
        assert!(spatial_diversity(&g, u(0), &locs(&[0, 3, 1]), 2).is_ok());
    }

    #[test]
    fn area_means() {
        // users 0,1 in area 0 with D_social 0 and 1; user 2 in area 1
        let g = CommGraph::from_edges(
            "t",
            5,
            [(u(0), u(3), 1), (u(1), u(3), 1), (u(1), u(4), 1), (u(2), u(3), 4)],
        );
        let l = locs(&[0, 0, 1, 1, 2]);
        let t = compute_diversity(&g, &l, &DiversityOptions::new(3)).unwrap();
        assert_eq!(t.users.len(), 3);
        let social = area_diversity(&t, Kind::Social);
        assert_eq!(social[&0], 0.5);
        assert_eq!(social[&1], 0.0);
        assert!(!social.contains_key(&2));
        assert_eq!(t.area(0).unwrap().users, 2);

        let mut opts = DiversityOptions::new(3);
        opts.include_single_contact = false;
        let t = compute_diversity(&g, &l, &opts).unwrap();
        assert_eq!(t.users.len(), 1);
        assert_eq!(area_diversity(&t, Kind::Social)[&0], 1.0);
    }

    #[test]
    fn union_direction_counts_received_messages() {
        let g = CommGraph::from_edges("t", 3, [(u(0), u(1), 1), (u(2), u(0), 1)]);
        let mut opts = DiversityOptions::new(3);
        let out = compute_diversity(&g, &locs(&[0, 1, 2]), &opts).unwrap();
        assert_eq!(out.user(u(0)).unwrap().k, 1);
        opts.direction = Direction::Union;
        let uni = compute_diversity(&g, &locs(&[0, 1, 2]), &opts).unwrap();
        assert_eq!(uni.user(u(0)).unwrap().k, 2);
        assert_eq!(uni.user(u(0)).unwrap().social, 1.0);
    }
}
