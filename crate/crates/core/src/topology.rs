//! Network graph, routes and the binary routing matrix `A` with `Y = A X`.

use std::collections::{HashMap, VecDeque};
use std::ops::AddAssign;

use nalgebra::{DMatrix, DVector, Scalar};
use rand::seq::SliceRandom;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A directed link. Ids are 1-based and contiguous.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub id: usize,
    pub src: String,
    pub dst: String,
    pub capacity_bps: u64,
}

/// An origin-destination route as an ordered sequence of link ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    pub id: usize,
    pub links: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub nodes: Vec<String>,
    pub links: Vec<Link>,
    pub routes: Vec<Route>,
}

/// On-disk layout; `routes` may be omitted to request shortest-path routing.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct TopologyFile {
    nodes: Vec<String>,
    links: Vec<Link>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    routes: Option<Vec<Route>>,
}

impl Topology {
    /// Builds and validates a topology. When `routes` is `None`, routes are
    /// generated with [`shortest_path_routes`].
    pub fn new(nodes: Vec<String>, links: Vec<Link>, routes: Option<Vec<Route>>) -> Result<Self> {
        let mut topo = Topology {
            nodes,
            links,
            routes: Vec::new(),
        };
        topo.validate_links()?;
        topo.routes = match routes {
            Some(r) => r,
            None => shortest_path_routes(&topo.nodes, &topo.links)?,
        };
        topo.validate_routes()?;
        Ok(topo)
    }

    pub fn num_links(&self) -> usize {
        self.links.len()
    }

    pub fn num_routes(&self) -> usize {
        self.routes.len()
    }

    pub fn link(&self, id: usize) -> Result<&Link> {
        id.checked_sub(1)
            .and_then(|i| self.links.get(i))
            .ok_or(Error::UnknownLink(id))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TopologyFile = serde_json::from_str(text)?;
        Topology::new(file.nodes, file.links, file.routes)
    }

    pub fn to_json(&self) -> Result<String> {
        let file = TopologyFile {
            nodes: self.nodes.clone(),
            links: self.links.clone(),
            routes: Some(self.routes.clone()),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    fn validate_links(&self) -> Result<()> {
        let mut seen = HashMap::new();
        for n in &self.nodes {
            if seen.insert(n.as_str(), ()).is_some() {
                return Err(Error::InvalidTopology(format!("duplicate node `{n}`")));
            }
        }
        for (i, link) in self.links.iter().enumerate() {
            if link.id != i + 1 {
                return Err(Error::InvalidTopology(format!(
                    "link ids must be contiguous from 1; position {} has id {}",
                    i + 1,
                    link.id
                )));
            }
            for end in [&link.src, &link.dst] {
                if !seen.contains_key(end.as_str()) {
                    return Err(Error::InvalidTopology(format!(
                        "link {} references unknown node `{end}`",
                        link.id
                    )));
                }
            }
        }
        Ok(())
    }

    fn validate_routes(&self) -> Result<()> {
        for (i, route) in self.routes.iter().enumerate() {
            if route.id != i + 1 {
                return Err(Error::InvalidTopology(format!(
                    "route ids must be contiguous from 1; position {} has id {}",
                    i + 1,
                    route.id
                )));
            }
            if route.links.is_empty() {
                return Err(Error::MalformedRoute {
                    route: route.id,
                    reason: "empty link sequence".into(),
                });
            }
            let mut prev: Option<&Link> = None;
            for &lid in &route.links {
                let link = self.link(lid).map_err(|_| Error::MalformedRoute {
                    route: route.id,
                    reason: format!("references missing link {lid}"),
                })?;
                if let Some(p) = prev {
                    if p.dst != link.src {
                        return Err(Error::MalformedRoute {
                            route: route.id,
                            reason: format!(
                                "link {} ends at `{}` but link {} starts at `{}`",
                                p.id, p.dst, link.id, link.src
                            ),
                        });
                    }
                }
                prev = Some(link);
            }
        }
        Ok(())
    }
}

/// Hop-count shortest routes for every ordered pair of distinct nodes.
///
/// Pairs are enumerated in node order (source major). Among equal-length
/// paths the lexicographically smallest link-id sequence wins.
pub fn shortest_path_routes(nodes: &[String], links: &[Link]) -> Result<Vec<Route>> {
    let index: HashMap<&str, usize> = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let n = nodes.len();
    // outgoing links sorted by id (links are already in id order)
    let mut out: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); n];
    for link in links {
        let s = index[link.src.as_str()];
        let d = index[link.dst.as_str()];
        out[s].push((link.id, d));
        incoming[d].push(s);
    }

    let mut routes = Vec::with_capacity(n * n.saturating_sub(1));
    // hop distance to each destination, via reverse BFS
    let dist_to: Vec<Vec<Option<usize>>> = (0..n)
        .map(|dst| {
            let mut dist = vec![None; n];
            dist[dst] = Some(0);
            let mut queue = VecDeque::from([dst]);
            while let Some(v) = queue.pop_front() {
                let dv = dist[v].unwrap();
                for &u in &incoming[v] {
                    if dist[u].is_none() {
                        dist[u] = Some(dv + 1);
                        queue.push_back(u);
                    }
                }
            }
            dist
        })
        .collect();

    for src in 0..n {
        for dst in 0..n {
            if src == dst {
                continue;
            }
            let dist = &dist_to[dst];
            let Some(mut remaining) = dist[src] else {
                return Err(Error::InvalidTopology(format!(
                    "no path from `{}` to `{}`",
                    nodes[src], nodes[dst]
                )));
            };
            let mut at = src;
            let mut path = Vec::with_capacity(remaining);
            while remaining > 0 {
                let &(lid, next) = out[at]
                    .iter()
                    .find(|&&(_, v)| dist[v] == Some(remaining - 1))
                    .expect("BFS distance implies a successor on a shortest path");
                path.push(lid);
                at = next;
                remaining -= 1;
            }
            routes.push(Route {
                id: routes.len() + 1,
                links: path,
            });
        }
    }
    Ok(routes)
}

/// Binary `L x J` routing matrix together with the per-link route sets `A_l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutingMatrix {
    num_links: usize,
    num_routes: usize,
    // row-major, entries[l * J + j]
    entries: Vec<bool>,
    link_route_sets: Vec<Vec<usize>>,
}

/// Builds `A` from route paths. Indices in the result are 0-based.
pub fn build_routing_matrix(topology: &Topology) -> Result<RoutingMatrix> {
    let l = topology.num_links();
    let j = topology.num_routes();
    let mut entries = vec![false; l * j];
    for (col, route) in topology.routes.iter().enumerate() {
        for &lid in &route.links {
            if lid == 0 || lid > l {
                return Err(Error::MalformedRoute {
                    route: route.id,
                    reason: format!("references missing link {lid}"),
                });
            }
            entries[(lid - 1) * j + col] = true;
        }
    }
    RoutingMatrix::from_entries(l, j, entries)
}

impl RoutingMatrix {
    /// Builds a routing matrix from a row-major boolean table.
    pub fn from_entries(num_links: usize, num_routes: usize, entries: Vec<bool>) -> Result<Self> {
        if entries.len() != num_links * num_routes {
            return Err(Error::DimensionMismatch {
                expected: num_links * num_routes,
                got: entries.len(),
            });
        }
        let link_route_sets = (0..num_links)
            .map(|l| {
                (0..num_routes)
                    .filter(|&j| entries[l * num_routes + j])
                    .collect()
            })
            .collect();
        Ok(RoutingMatrix {
            num_links,
            num_routes,
            entries,
            link_route_sets,
        })
    }

    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let l = rows.len();
        let j = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(l * j);
        for row in rows {
            if row.len() != j {
                return Err(Error::DimensionMismatch {
                    expected: j,
                    got: row.len(),
                });
            }
            entries.extend(row.iter().map(|&v| v != 0));
        }
        Self::from_entries(l, j, entries)
    }

    pub fn num_links(&self) -> usize {
        self.num_links
    }

    pub fn num_routes(&self) -> usize {
        self.num_routes
    }

    /// Entry `a_{lj}` with 0-based indices.
    pub fn get(&self, link: usize, route: usize) -> bool {
        self.entries[link * self.num_routes + route]
    }

    /// Routes (0-based) traversing link index `link` (0-based).
    pub fn route_set(&self, link: usize) -> &[usize] {
        &self.link_route_sets[link]
    }

    pub fn link_route_sets(&self) -> &[Vec<usize>] {
        &self.link_route_sets
    }

    /// Dense copy of `A`.
    pub fn to_dense<T: Real>(&self) -> DMatrix<T> {
        DMatrix::from_fn(self.num_links, self.num_routes, |l, j| {
            if self.get(l, j) {
                T::one()
            } else {
                T::zero()
            }
        })
    }

    /// Dense sub-matrix made of the given 0-based link rows.
    pub fn rows_dense<T: Real>(&self, links: &[usize]) -> DMatrix<T> {
        DMatrix::from_fn(links.len(), self.num_routes, |r, j| {
            if self.get(links[r], j) {
                T::one()
            } else {
                T::zero()
            }
        })
    }

    /// Sub-matrix of selected link rows, still as a routing matrix.
    pub fn select_links(&self, links: &[usize]) -> RoutingMatrix {
        let mut entries = Vec::with_capacity(links.len() * self.num_routes);
        for &l in links {
            entries.extend_from_slice(&self.entries[l * self.num_routes..(l + 1) * self.num_routes]);
        }
        RoutingMatrix::from_entries(links.len(), self.num_routes, entries)
            .expect("consistent dimensions")
    }

    /// `Y = A X` for a route vector.
    pub fn apply<T>(&self, route_traffic: &DVector<T>) -> Result<DVector<T>>
    where
        T: Scalar + Zero + AddAssign + Copy,
    {
        if route_traffic.len() != self.num_routes {
            return Err(Error::DimensionMismatch {
                expected: self.num_routes,
                got: route_traffic.len(),
            });
        }
        Ok(DVector::from_iterator(
            self.num_links,
            self.link_route_sets.iter().map(|set| {
                let mut acc = T::zero();
                for &j in set {
                    acc += route_traffic[j];
                }
                acc
            }),
        ))
    }

    /// `Y = A X` for a `J x T` matrix of route series; returns `L x T`.
    pub fn apply_series<T>(&self, route_traffic: &DMatrix<T>) -> Result<DMatrix<T>>
    where
        T: Scalar + Zero + AddAssign + Copy,
    {
        if route_traffic.nrows() != self.num_routes {
            return Err(Error::DimensionMismatch {
                expected: self.num_routes,
                got: route_traffic.nrows(),
            });
        }
        let cols = route_traffic.ncols();
        let mut out = DMatrix::from_element(self.num_links, cols, T::zero());
        for t in 0..cols {
            let x = route_traffic.column(t);
            for (l, set) in self.link_route_sets.iter().enumerate() {
                let mut acc = T::zero();
                for &j in set {
                    acc += x[j];
                }
                out[(l, t)] = acc;
            }
        }
        Ok(out)
    }
}

/// Convenience wrapper for [`RoutingMatrix::apply`].
pub fn apply_routing<T>(routing: &RoutingMatrix, route_traffic: &DVector<T>) -> Result<DVector<T>>
where
    T: Scalar + Zero + AddAssign + Copy,
{
    routing.apply(route_traffic)
}

const I2_NODES: [&str; 9] = [
    "Seattle",
    "Los Angeles",
    "Salt Lake City",
    "Houston",
    "Kansas City",
    "Chicago",
    "Atlanta",
    "New York",
    "Washington",
];

// (id, src, dst, Gb/s); odd ids are listed in the forward direction
const I2_LINKS: [(usize, &str, &str, u64); 26] = [
    (1, "Los Angeles", "Seattle", 10),
    (2, "Seattle", "Los Angeles", 10),
    (3, "Seattle", "Salt Lake City", 10),
    (4, "Salt Lake City", "Seattle", 10),
    (5, "Los Angeles", "Salt Lake City", 10),
    (6, "Salt Lake City", "Los Angeles", 10),
    (7, "Los Angeles", "Houston", 10),
    (8, "Houston", "Los Angeles", 10),
    (9, "Salt Lake City", "Kansas City", 10),
    (10, "Kansas City", "Salt Lake City", 10),
    (11, "Kansas City", "Houston", 10),
    (12, "Houston", "Kansas City", 10),
    (13, "Kansas City", "Chicago", 20),
    (14, "Chicago", "Kansas City", 20),
    (15, "Houston", "Atlanta", 10),
    (16, "Atlanta", "Houston", 10),
    (17, "Chicago", "Atlanta", 10),
    (18, "Atlanta", "Chicago", 10),
    (19, "Chicago", "New York", 10),
    (20, "New York", "Chicago", 10),
    (21, "Chicago", "Washington", 10),
    (22, "Washington", "Chicago", 10),
    (23, "Atlanta", "Washington", 10),
    (24, "Washington", "Atlanta", 10),
    (25, "Washington", "New York", 20),
    (26, "New York", "Washington", 20),
];

/// The Internet2 backbone: 9 nodes, 26 directed links and 72 shortest-path
/// routes.
pub fn internet2_topology() -> Topology {
    let nodes = I2_NODES.iter().map(|s| s.to_string()).collect();
    let links = I2_LINKS
        .iter()
        .map(|&(id, src, dst, gbps)| Link {
            id,
            src: src.into(),
            dst: dst.into(),
            capacity_bps: gbps * 1_000_000_000,
        })
        .collect();
    Topology::new(nodes, links, None).expect("built-in topology is valid")
}

/// Random strongly connected topology: a bidirectional ring over `n`
/// nodes plus `chords` extra bidirectional links between random non-adjacent
/// pairs, with shortest-path routes.
pub fn random_topology(n: usize, chords: usize, seed: u64) -> Result<Topology> {
    if n < 3 {
        return Err(Error::InvalidTopology(format!("need at least 3 nodes, got {n}")));
    }
    let mut rng = crate::sim::stream_rng(seed, 0);
    let mut pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    let mut candidates: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 2..n).map(move |j| (i, j)))
        .filter(|&(i, j)| !(i == 0 && j == n - 1))
        .collect();
    candidates.shuffle(&mut rng);
    pairs.extend(candidates.into_iter().take(chords));
    let nodes: Vec<String> = (1..=n).map(|i| format!("n{i}")).collect();
    let mut links = Vec::with_capacity(2 * pairs.len());
    for (a, b) in pairs {
        for (s, d) in [(a, b), (b, a)] {
            links.push(Link {
                id: links.len() + 1,
                src: nodes[s].clone(),
                dst: nodes[d].clone(),
                capacity_bps: 10_000_000_000,
            });
        }
    }
    Topology::new(nodes, links, None)
}
