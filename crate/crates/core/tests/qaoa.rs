use std::sync::Arc;

use qcache::exec::Executor;
use qcache::qaoa::{de_optimize, random_graph, DeConfig, Grid};
use qcache::store::{EmbeddedStore, MemoryStore, NetworkedStore, Server, Store};

#[test]
fn trajectory_is_the_same_on_every_backend() {
    let graph = random_graph(12, 20, 42).unwrap();
    let cfg = DeConfig {
        population: 16,
        generations: 8,
        seed: 9,
        ..DeConfig::default()
    };
    let dir = tempfile::tempdir().unwrap();
    let server = Server::bind("127.0.0.1:0").unwrap().spawn().unwrap();
    let stores: Vec<Arc<dyn Store>> = vec![
        Arc::new(MemoryStore::new()),
        Arc::new(EmbeddedStore::open(dir.path()).unwrap()),
        Arc::new(NetworkedStore::connect(server.addr().to_string()).unwrap()),
    ];
    let baseline = de_optimize(&graph, 2, &Grid::COARSE, &cfg, &Executor::uncached(), 1).unwrap();
    assert_eq!(baseline.accounting.simulations, 16 * 9);
    for store in stores {
        let backend = store.backend();
        let exec = Executor::cached(store);
        let r = de_optimize(&graph, 2, &Grid::COARSE, &cfg, &exec, 4).unwrap();
        assert_eq!(r.best_energies(), baseline.best_energies(), "{backend}");
        assert_eq!(
            (r.best_betas.clone(), r.best_gammas.clone()),
            (baseline.best_betas.clone(), baseline.best_gammas.clone())
        );
        let a = r.accounting;
        assert_eq!(a.hits + a.inserted + a.extra, a.requests, "{backend}");
        assert!(r.history.windows(2).all(|w| w[0].hits <= w[1].hits));
        assert!(a.hits > 0, "{backend}: no hits");
    }
    server.shutdown();
}

#[test]
fn a_warm_store_serves_a_rerun_entirely() {
    let graph = random_graph(10, 15, 1).unwrap();
    let cfg = DeConfig {
        population: 8,
        generations: 4,
        ..DeConfig::default()
    };
    let store: Arc<dyn Store> = Arc::new(MemoryStore::new());
    let first = de_optimize(
        &graph,
        1,
        &Grid::MEDIUM,
        &cfg,
        &Executor::cached(Arc::clone(&store)),
        2,
    )
    .unwrap();
    let second = de_optimize(&graph, 1, &Grid::MEDIUM, &cfg, &Executor::cached(store), 2).unwrap();
    assert_eq!(first.best_energies(), second.best_energies());
    assert_eq!(second.accounting.simulations, 0);
    assert_eq!(second.accounting.hits, 8 * 5);
}
