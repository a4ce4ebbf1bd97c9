use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use contextkg_server::config::Config;
use contextkg_server::llm::Models;
use contextkg_server::{router, AppState};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "contextkg", version, about = "Context-aware knowledge-graph layout service")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, short, env = "CONTEXTKG_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service (default).
    Serve {
        #[arg(long)]
        host: Option<String>,
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        graph_dir: Option<PathBuf>,
        /// Use the deterministic offline paths for every model call.
        #[arg(long)]
        offline: bool,
    },
    /// Print the effective configuration as TOML.
    Config,
}

fn load_config(path: Option<&PathBuf>) -> Result<Config, String> {
    let mut config = match path {
        Some(p) => Config::from_file(p).map_err(|e| e.to_string())?,
        None => Config::default(),
    };
    config.apply_env().map_err(|e| e.to_string())?;
    Ok(config)
}

fn models_for(config: &Config) -> Models {
    if config.live() {
        Models::http(&config.llm, &config.engine.embedding.provider)
    } else {
        Models::offline()
    }
}

async fn serve(config: Config) -> Result<(), String> {
    let addr: SocketAddr = format!("{}:{}", config.server.host, config.server.port)
        .parse()
        .map_err(|e| format!("invalid listen address: {e}"))?;
    let models = models_for(&config);
    tracing::info!(
        live = config.live(),
        model = %config.llm.model,
        data_dir = %config.server.data_dir.display(),
        "starting"
    );
    let state = AppState::start(config, models).await.map_err(|e| e.to_string())?;
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| format!("bind {addr}: {e}"))?;
    tracing::info!(%addr, "listening");
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .json()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .init();
    let cli = Cli::parse();
    let result = load_config(cli.config.as_ref()).and_then(|mut config| match cli.command {
        Some(Command::Config) => toml::to_string_pretty(&config)
            .map(|t| println!("{t}"))
            .map_err(|e| e.to_string()),
        Some(Command::Serve {
            host,
            port,
            data_dir,
            graph_dir,
            offline,
        }) => {
            if let Some(h) = host {
                config.server.host = h;
            }
            if let Some(p) = port {
                config.server.port = p;
            }
            if let Some(d) = data_dir {
                config.server.data_dir = d;
            }
            if graph_dir.is_some() {
                config.server.graph_dir = graph_dir;
            }
            config.server.offline |= offline;
            run(config)
        }
        None => run(config),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            tracing::error!(error = %e, "fatal");
            eprintln!("contextkg: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(config: Config) -> Result<(), String> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| e.to_string())?
        .block_on(serve(config))
}
