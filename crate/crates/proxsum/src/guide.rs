//! Book chapters as doc-tested modules (filled in once the book exists).
