//! Point the agents at a live OpenAI-compatible endpoint instead of the
//! scripted backend. Runs only when `A11YREPLAY_BASE_URL` is set; the
//! bearer token comes from `A11YREPLAY_API_KEY`.
//!
//! ```bash
//! A11YREPLAY_BASE_URL=http://localhost:11434 \
//! A11YREPLAY_MODEL=llama3 \
//! cargo run -p a11yreplay --example http_backend
//! ```

use std::sync::Arc;

use a11yreplay::agents::{Agents, HttpClientConfig, HttpLlmClient};

fn main() {
    let Ok(base_url) = std::env::var("A11YREPLAY_BASE_URL") else {
        println!("A11YREPLAY_BASE_URL is not set; nothing to do.");
        println!("Set it to an OpenAI-compatible endpoint to run this example.");
        return;
    };
    let mut config = HttpClientConfig::new(base_url);
    if let Ok(model) = std::env::var("A11YREPLAY_MODEL") {
        config.model = model;
    }
    println!("Asking {} ({}) for a plan...", config.base_url, config.model);

    let client = HttpLlmClient::new(config).expect("client builds");
    let mut agents = Agents::new(Arc::new(client));
    let screen = "(1) [Tab (Clickable)] \"Home\" (10, 560) to (130, 610)\n\
                  (2) [Tab (Clickable)] \"Search\" (140, 560) to (260, 610)";
    match agents.propose_plan("Open the Search tab", "Podcasts", screen) {
        Ok(plan) => {
            println!("Got {} step(s):", plan.steps.len());
            for step in &plan.steps {
                println!("  - {}", step.action);
            }
        }
        Err(e) => println!("Planning failed: {e}"),
    }
}
