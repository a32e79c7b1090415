use nalgebra::{DMatrix, DVector};
use netkrig::topology::{random_topology, Topology};
use netkrig::{build_routing_matrix, internet2_topology};
use proptest::prelude::*;

fn naive_product(topo: &Topology, x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut y = DMatrix::zeros(topo.num_links(), x.ncols());
    for route in &topo.routes {
        for &l in &route.links {
            for t in 0..x.ncols() {
                y[(l - 1, t)] += x[(route.id - 1, t)];
            }
        }
    }
    y
}

#[test]
fn internet2_matches_triple_loop() {
    let topo = internet2_topology();
    let a = build_routing_matrix(&topo).unwrap();
    let x = DMatrix::from_fn(72, 10, |i, j| ((i * 31 + j * 17) % 23) as f64 - 7.5);
    let y = a.apply_series(&x).unwrap();
    assert_eq!(y, naive_product(&topo, &x));
    let dense: DMatrix<f64> = a.to_dense();
    for l in 0..a.num_links() {
        let direct: usize = (0..72).filter(|&j| dense[(l, j)] == 1.0).count();
        assert_eq!(direct, a.route_set(l).len());
    }
}

#[test]
fn zero_traffic_gives_zero_loads() {
    let a = build_routing_matrix(&internet2_topology()).unwrap();
    let y = a.apply(&DVector::<f64>::zeros(72)).unwrap();
    assert!(y.iter().all(|&v| v == 0.0));
}

#[test]
fn route_generation_is_deterministic() {
    let t1 = internet2_topology();
    let t2 = internet2_topology();
    assert_eq!(t1.routes, t2.routes);
    let file = serde_json::json!({ "nodes": t1.nodes, "links": t1.links }).to_string();
    let t3 = Topology::from_json(&file).unwrap();
    assert_eq!(t3.routes, t1.routes);
}

#[test]
fn every_route_is_a_shortest_path() {
    let topo = internet2_topology();
    // Floyd-Warshall hop counts as an independent check
    let n = topo.nodes.len();
    let idx = |s: &str| topo.nodes.iter().position(|x| x == s).unwrap();
    let mut d = vec![vec![usize::MAX / 4; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0;
    }
    for l in &topo.links {
        d[idx(&l.src)][idx(&l.dst)] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
            }
        }
    }
    for r in &topo.routes {
        let first = topo.link(r.links[0]).unwrap();
        let last = topo.link(*r.links.last().unwrap()).unwrap();
        assert_eq!(r.links.len(), d[idx(&first.src)][idx(&last.dst)]);
    }
}

proptest! {
    #[test]
    fn routing_is_additive(seed in 0u64..1000, a in -10.0f64..10.0) {
        let topo = random_topology(7, 3, seed).unwrap();
        let r = build_routing_matrix(&topo).unwrap();
        let j = r.num_routes();
        let x1 = DVector::from_fn(j, |i, _| (i as f64 * 0.37 + a).sin());
        let x2 = DVector::from_fn(j, |i, _| (i as f64 * 1.3 - a).cos());
        let lhs = r.apply(&(&x1 + &x2)).unwrap();
        let rhs = r.apply(&x1).unwrap() + r.apply(&x2).unwrap();
        prop_assert!((lhs - rhs).amax() < 1e-12);
    }

    #[test]
    fn link_load_is_route_set_sum(seed in 0u64..1000) {
        let topo = random_topology(6, 2, seed).unwrap();
        let r = build_routing_matrix(&topo).unwrap();
        let x = DVector::from_fn(r.num_routes(), |i, _| (i * i) as f64 + seed as f64);
        let y = r.apply(&x).unwrap();
        for l in 0..r.num_links() {
            let s: f64 = r.route_set(l).iter().map(|&j| x[j]).sum();
            prop_assert_eq!(y[l], s);
        }
    }
}
