mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use eflesh_core::pipeline::PipelineError;
use eflesh_core::{Error, ErrorClass};

use args::{Cli, Command};

/// A failed command: message for stderr plus its exit-code class.
#[derive(Debug)]
pub struct Failure {
    pub class: ErrorClass,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            class: ErrorClass::Usage,
            message: message.into(),
        }
    }
}

fn chain(e: &dyn std::error::Error) -> String {
    let mut msg = e.to_string();
    let mut src = e.source();
    while let Some(s) = src {
        let s_msg = s.to_string();
        if !msg.contains(&s_msg) {
            msg.push_str(": ");
            msg.push_str(&s_msg);
        }
        src = s.source();
    }
    msg
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            class: e.class(),
            message: chain(&e),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Self {
            class: e.class(),
            message: chain(&e),
        }
    }
}

macro_rules! failure_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Error::from(e).into()
            }
        }
    )*};
}

failure_from!(
    eflesh_core::mesh::MeshError,
    eflesh_core::lattice::LatticeError,
    eflesh_core::fabrication::FabricationError,
    eflesh_core::magnetics::MagneticsError,
    eflesh_core::sensor::SensorError
);

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { ErrorClass::Usage.exit_code() } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let result = match cli.command {
        Command::MeshInfo(a) => commands::mesh_info(a),
        Command::Convert(a) => commands::convert(a),
        Command::Lattice(a) => commands::lattice(a),
        Command::Pouch(a) => commands::pouch(a),
        Command::Slot(a) => commands::slot(a),
        Command::Pause(a) => commands::pause(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::ComparePolarity(a) => commands::compare_polarity(a),
        Command::SensorModel(a) => commands::sensor_model(a),
        Command::Localize(a) => commands::localize(a),
        Command::Sensitivity(a) => commands::sensitivity(a),
        Command::SlipTrain(a) => commands::slip_train(a),
        Command::Pipeline(a) => commands::pipeline(a),
        Command::Info(a) => commands::info(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.class.exit_code() as u8)
        }
    }
}
