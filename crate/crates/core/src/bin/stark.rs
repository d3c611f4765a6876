//! `stark` command-line tool; see [`stark_resonance::cli`].

fn main() {
    std::process::exit(stark_resonance::cli::run(std::env::args_os()));
}
