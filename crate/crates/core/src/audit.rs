//! Allocation audit.
//!
//! [`AuditAllocator`] wraps the system allocator and, while auditing is
//! enabled, records the size of the largest single allocation. A binary opts
//! in by installing it:
//!
//! ```ignore
//! #[global_allocator]
//! static ALLOC: sdp_core::audit::AuditAllocator = sdp_core::audit::AuditAllocator;
//! ```
//!
//! and then calling [`enable_from_env`] (honours `SDP_AUDIT_ALLOC=1`) or
//! [`set_enabled`]. Sizes are reported in `f64` entries (bytes / 8).

use std::alloc::{GlobalAlloc, Layout, System};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

pub const AUDIT_ENV: &str = "SDP_AUDIT_ALLOC";

static ENABLED: AtomicBool = AtomicBool::new(false);
static PEAK_BYTES: AtomicUsize = AtomicUsize::new(0);
static SEEN: AtomicUsize = AtomicUsize::new(0);

pub struct AuditAllocator;

#[inline]
fn record(size: usize) {
    if ENABLED.load(Ordering::Relaxed) {
        SEEN.fetch_add(1, Ordering::Relaxed);
        PEAK_BYTES.fetch_max(size, Ordering::Relaxed);
    }
}

unsafe impl GlobalAlloc for AuditAllocator {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        record(layout.size());
        System.alloc(layout)
    }

    unsafe fn alloc_zeroed(&self, layout: Layout) -> *mut u8 {
        record(layout.size());
        System.alloc_zeroed(layout)
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        System.dealloc(ptr, layout)
    }

    unsafe fn realloc(&self, ptr: *mut u8, layout: Layout, new_size: usize) -> *mut u8 {
        record(new_size);
        System.realloc(ptr, layout, new_size)
    }
}

/// Enables auditing when `SDP_AUDIT_ALLOC=1`. Returns whether it is now on.
pub fn enable_from_env() -> bool {
    let on = std::env::var(AUDIT_ENV).map(|v| v == "1").unwrap_or(false);
    if on {
        set_enabled(true);
    }
    is_enabled()
}

pub fn set_enabled(on: bool) {
    ENABLED.store(on, Ordering::SeqCst);
}

pub fn is_enabled() -> bool {
    ENABLED.load(Ordering::SeqCst)
}

/// Clears the recorded peak.
pub fn reset() {
    PEAK_BYTES.store(0, Ordering::SeqCst);
    SEEN.store(0, Ordering::SeqCst);
}

/// Largest single allocation since the last [`reset`], in `f64` entries.
///
/// `None` when auditing is off or the audit allocator is not installed
/// (no allocation was observed).
pub fn peak_entries() -> Option<usize> {
    if !is_enabled() || SEEN.load(Ordering::SeqCst) == 0 {
        return None;
    }
    Some(PEAK_BYTES.load(Ordering::SeqCst).div_ceil(std::mem::size_of::<f64>()))
}
