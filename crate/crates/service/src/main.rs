use clap::Parser;
use dualmic_service::{serve, AppState};
use tokio::net::TcpListener;

#[derive(Debug, Parser)]
#[command(name = "dualmic-service", version, about = "Live enhancement sessions over WebSocket")]
struct Args {
    /// Listen address.
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: String,
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    tracing_subscriber::fmt::init();
    let args = Args::parse();
    let state = tokio::task::spawn_blocking(AppState::new)
        .await
        .map_err(std::io::Error::other)?;
    let listener = TcpListener::bind(&args.addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    serve(listener, state).await
}
