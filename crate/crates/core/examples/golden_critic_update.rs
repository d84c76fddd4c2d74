//! Prints the frozen values checked by the `critic_update_golden_value` test:
//! the pre-step loss of one critic update and the loss on the same batch
//! afterwards. With an argument, also saves the initial agent checkpoint there.

use edged3::agents::{Agent, AgentConfig, AgentKind};
use edged3::expectile::ExpectileParams;
use edged3::numkit::Matrix;
use edged3::replay::Batch;
use edged3::rng::{stream, Stream};

fn main() {
    let mut cfg = AgentConfig::for_kind(AgentKind::EdgeDdpg, 2, 1);
    cfg.hidden = vec![4];
    cfg.batch_size = 4;
    cfg.gamma = 0.9;
    cfg.lr_critic = 1e-2;
    cfg.expectile = ExpectileParams::new(1.0, 2.0).unwrap();
    let mut agent = Agent::new(AgentKind::EdgeDdpg, cfg, 42).unwrap();
    if let Some(path) = std::env::args().nth(1) {
        agent.save(std::path::Path::new(&path)).unwrap();
    }
    let batch = Batch {
        states: Matrix::from_rows(&[[0.1, -0.2], [0.5, 0.3], [-0.7, 0.9], [0.0, 0.4]]).unwrap(),
        actions: Matrix::from_rows(&[[0.2], [-0.5], [0.9], [0.0]]).unwrap(),
        rewards: vec![1.0, -0.5, 0.25, 2.0],
        next_states: Matrix::from_rows(&[[0.2, -0.1], [0.4, 0.2], [-0.6, 1.0], [0.1, 0.5]]).unwrap(),
        dones: vec![0.0, 0.0, 1.0, 0.0],
    };
    let (before, _) = agent.critic_update(&batch, &mut stream(0, Stream::Train)).unwrap();
    let (after, _) = agent.clone().critic_update(&batch, &mut stream(0, Stream::Train)).unwrap();
    println!("{before:?} {after:?}");
}
