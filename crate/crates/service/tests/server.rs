mod common;

use std::net::SocketAddr;

use common::{obs_of, parse, reset, script, step};
use futures_util::{SinkExt, StreamExt};
use gapnav::action::Action;
use gapnav::encoding::ObservationFrame;
use gapnav::sim::scenario::Catalog;
use gapnav::sim::SimConfig;
use gapnav_service::protocol::{Envelope, Reply};
use gapnav_service::{bind, ServiceConfig};
use rand::{Rng, SeedableRng};
use tokio::io::{AsyncBufReadExt, AsyncWriteExt, BufReader, Lines};
use tokio::net::tcp::{OwnedReadHalf, OwnedWriteHalf};
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;

async fn start(demo_dir: &std::path::Path) -> (SocketAddr, SocketAddr) {
    let bound = bind(ServiceConfig {
        bind: "127.0.0.1:0".parse().unwrap(),
        ws_bind: Some("127.0.0.1:0".parse().unwrap()),
        sim: SimConfig::default(),
        catalog: Catalog::builtin(),
        log_dir: None,
        demo_dir: demo_dir.to_path_buf(),
    })
    .await
    .unwrap();
    let addrs = (bound.tcp_addr().unwrap(), bound.ws_addr().unwrap());
    tokio::spawn(bound.run());
    addrs
}

struct Client {
    lines: Lines<BufReader<OwnedReadHalf>>,
    write: OwnedWriteHalf,
}

impl Client {
    async fn connect(addr: SocketAddr) -> Self {
        let (r, w) = TcpStream::connect(addr).await.unwrap().into_split();
        Self {
            lines: BufReader::new(r).lines(),
            write: w,
        }
    }

    async fn send(&mut self, line: &str) {
        self.write.write_all(format!("{line}\n").as_bytes()).await.unwrap();
    }

    async fn recv(&mut self) -> String {
        self.lines.next_line().await.unwrap().unwrap()
    }

    async fn call(&mut self, line: &str) -> Envelope<Reply> {
        self.send(line).await;
        parse(&self.recv().await)
    }
}

/// Observation stream of a scripted episode on its own connection.
async fn solo(addr: SocketAddr, template: &str, seed: u64, steps: u64) -> Vec<ObservationFrame> {
    let mut c = Client::connect(addr).await;
    let mut r = c.call(&reset(1, template, seed)).await;
    let mut out = vec![obs_of(&r).clone()];
    for k in 0..steps {
        r = c.call(&step(k + 2, script(obs_of(&r), k))).await;
        out.push(obs_of(&r).clone());
        if matches!(r.body, Reply::Done(_)) {
            break;
        }
    }
    out
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn two_sessions_on_the_same_seed_see_the_same_stream() {
    let dir = tempfile::tempdir().unwrap();
    let (addr, _) = start(dir.path()).await;
    let (a, b) = tokio::join!(solo(addr, "e", 3, 25), solo(addr, "e", 3, 25));
    assert_eq!(a, b);
    assert!(a.len() > 5);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn pipelined_requests_come_back_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let (addr, _) = start(dir.path()).await;
    let mut c = Client::connect(addr).await;
    // everything sent before reading anything, junk included
    let mut sent = vec![reset(10, "a", 0)];
    for k in 0..20 {
        sent.push(step(11 + k, Action::new(0.4, 0.0)));
    }
    sent.insert(5, "garbage".to_string());
    sent.push(r#"{"seq":99,"kind":"render_state","payload":{}}"#.to_string());
    for line in &sent {
        c.send(line).await;
    }
    let mut seqs = Vec::new();
    for _ in &sent {
        seqs.push(parse(&c.recv().await).seq);
    }
    let mut expected: Vec<Option<u64>> = (10..31).map(Some).collect();
    expected.insert(5, None);
    expected.push(Some(99));
    assert_eq!(seqs, expected);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn interleaved_sessions_do_not_interfere() {
    let dir = tempfile::tempdir().unwrap();
    let (addr, _) = start(dir.path()).await;
    let want_d = solo(addr, "d", 8, 30).await;
    let want_h = solo(addr, "h", 1, 30).await;

    let mut d = Client::connect(addr).await;
    let mut h = Client::connect(addr).await;
    let mut noise = Client::connect(addr).await;
    let mut rd = d.call(&reset(1, "d", 8)).await;
    let mut rh = h.call(&reset(1, "h", 1)).await;
    noise.call(&reset(1, "d", 8)).await;
    let (mut got_d, mut got_h) = (vec![obs_of(&rd).clone()], vec![obs_of(&rh).clone()]);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    let (mut kd, mut kh, mut kn) = (0u64, 0u64, 0u64);
    while (got_d.len() < want_d.len()) || (got_h.len() < want_h.len()) {
        match rng.random_range(0..3) {
            0 if got_d.len() < want_d.len() => {
                rd = d.call(&step(kd + 2, script(obs_of(&rd), kd))).await;
                got_d.push(obs_of(&rd).clone());
                kd += 1;
            }
            1 if got_h.len() < want_h.len() => {
                rh = h.call(&step(kh + 2, script(obs_of(&rh), kh))).await;
                got_h.push(obs_of(&rh).clone());
                kh += 1;
            }
            _ => {
                // a third session driving the same world differently
                noise.send(&step(kn + 2, Action::new(-0.1, 0.7))).await;
                noise.recv().await;
                kn += 1;
            }
        }
    }
    assert_eq!(got_d, want_d);
    assert_eq!(got_h, want_h);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn websocket_mirror_speaks_the_same_payloads() {
    let dir = tempfile::tempdir().unwrap();
    let (tcp, ws) = start(dir.path()).await;
    let (mut sock, _) = tokio_tungstenite::connect_async(format!("ws://{ws}/ws")).await.unwrap();
    let mut c = Client::connect(tcp).await;
    let mut requests = vec![reset(1, "f", 2)];
    for k in 0..8 {
        requests.push(step(k + 2, Action::new(0.7, 0.1 * k as f64)));
    }
    requests.push(r#"{"seq":20,"kind":"render_state","payload":{}}"#.into());
    requests.push(r#"{"seq":21,"kind":"bogus","payload":{}}"#.into());
    for line in &requests {
        c.send(line).await;
        let over_tcp = parse(&c.recv().await);
        sock.send(Message::Text(line.clone().into())).await.unwrap();
        let Some(Ok(Message::Text(text))) = sock.next().await else {
            panic!("no websocket reply")
        };
        let mut over_ws = parse(&text);
        // only the session id may differ
        match (&mut over_ws.body, &over_tcp.body) {
            (Reply::Obs(w) | Reply::Done(w), Reply::Obs(t) | Reply::Done(t)) => w.session = t.session,
            (Reply::RenderState(w), Reply::RenderState(t)) => w.session = t.session,
            _ => {}
        }
        assert_eq!(over_ws, over_tcp, "{line}");
    }
}

#[tokio::test]
async fn busy_port_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let (addr, _) = start(dir.path()).await;
    let err = bind(ServiceConfig {
        bind: addr,
        ws_bind: None,
        sim: SimConfig::default(),
        catalog: Catalog::builtin(),
        log_dir: None,
        demo_dir: dir.path().to_path_buf(),
    })
    .await
    .err()
    .unwrap();
    assert_eq!(err.kind(), std::io::ErrorKind::AddrInUse);
}
