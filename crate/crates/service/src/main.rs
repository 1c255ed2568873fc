// SPDX-License-Identifier: Apache-2.0

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::Parser;
use evident_core::workspace::Workspace;
use evident_service::{router, App, Cors};

#[derive(Parser, Debug)]
#[command(name = "evident-service", version, about = "Serve an evident workspace over HTTP")]
struct Args {
    /// Workspace directory (default: $EVIDENT_WORKSPACE, then the current directory).
    #[arg(long, value_name = "DIR")]
    workspace: Option<PathBuf>,
    #[arg(long, default_value_t = 8787)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Value of Access-Control-Allow-Origin.
    #[arg(long, default_value = "*")]
    cors_origin: String,
    /// Create the workspace if it does not exist.
    #[arg(long)]
    init: bool,
}

#[tokio::main]
async fn main() -> ExitCode {
    let args = Args::parse();
    let dir = args
        .workspace
        .or_else(|| std::env::var_os("EVIDENT_WORKSPACE").filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    if args.init && Workspace::open(&dir).is_err() {
        if let Err(e) = Workspace::init(&dir) {
            eprintln!("error: {}: {e}", e.code());
            return ExitCode::from(1);
        }
    }
    let app = match App::open(&dir) {
        Ok(app) => Arc::new(app),
        Err(e) => {
            eprintln!("error: {}: {}", e.root().code(), e.root());
            return ExitCode::from(1);
        }
    };
    let addr: SocketAddr = match format!("{}:{}", args.host, args.port).parse() {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: bad address: {e}");
            return ExitCode::from(2);
        }
    };
    let listener = match tokio::net::TcpListener::bind(addr).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: cannot bind {addr}: {e}");
            return ExitCode::from(1);
        }
    };
    eprintln!("serving {} on http://{addr}", dir.display());
    if let Err(e) = axum::serve(listener, router(app, Cors { origin: args.cors_origin })).await {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
