use std::process::ExitCode;

fn main() -> ExitCode {
    // FOURIER_L1_THREADS caps the worker pool; 0 or unset means automatic.
    if let Ok(value) = std::env::var("FOURIER_L1_THREADS") {
        match value.trim().parse::<usize>() {
            Ok(0) => {}
            Ok(threads) => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
            Err(_) => {
                eprintln!("fourier-l1: FOURIER_L1_THREADS must be an integer, got `{value}`");
                return ExitCode::from(1);
            }
        }
    }

    let spec = match fourier_l1::cli::parse(std::env::args_os()) {
        Ok(spec) => spec,
        Err(err) => {
            // clap renders its own help/usage text inside the message
            eprintln!("{err}");
            return ExitCode::from(1);
        }
    };

    match fourier_l1::cli::run(&spec) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("fourier-l1: {err}");
            ExitCode::from(1)
        }
    }
}
