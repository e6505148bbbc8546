//! Logger printing `INFO:<component>:<message>` lines, matching the
//! simulator's event-log rendering.

use log::{LevelFilter, Metadata, Record};

struct ComponentLogger;

impl log::Log for ComponentLogger {
    fn enabled(&self, _: &Metadata) -> bool {
        true
    }

    fn log(&self, record: &Record) {
        if self.enabled(record.metadata()) {
            eprintln!("{}:{}:{}", record.level(), record.target(), record.args());
        }
    }

    fn flush(&self) {}
}

static LOGGER: ComponentLogger = ComponentLogger;

/// Installs the logger; `quiet` silences everything below errors.
pub fn init(quiet: bool) {
    let level = if quiet { LevelFilter::Error } else { LevelFilter::Info };
    if log::set_logger(&LOGGER).is_ok() {
        log::set_max_level(level);
    }
}
