//! Python bindings; populated below.
