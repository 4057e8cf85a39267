//! Twist constructions and verifiers.
