//! Bundled JDK type allowlist.
//!
//! Maps simple type names from a handful of core packages to their import
//! paths. `java.lang` types need no import. Anything outside this table is
//! treated as user-defined and satisfied with a synthesized stub.

/// Simple names of `java.lang` types that are visible without an import.
pub const JAVA_LANG: &[&str] = &[
    "Appendable",
    "ArithmeticException",
    "ArrayIndexOutOfBoundsException",
    "Boolean",
    "Byte",
    "CharSequence",
    "Character",
    "Class",
    "ClassCastException",
    "Cloneable",
    "Comparable",
    "Double",
    "Error",
    "Exception",
    "Float",
    "IllegalArgumentException",
    "IllegalStateException",
    "IndexOutOfBoundsException",
    "Integer",
    "Iterable",
    "Long",
    "Math",
    "NullPointerException",
    "Number",
    "NumberFormatException",
    "Object",
    "OutOfMemoryError",
    "Process",
    "ProcessBuilder",
    "Runnable",
    "Runtime",
    "RuntimeException",
    "Short",
    "StackOverflowError",
    "StrictMath",
    "String",
    "StringBuffer",
    "StringBuilder",
    "System",
    "Thread",
    "Throwable",
    "UnsupportedOperationException",
    "Void",
];

const JAVA_UTIL: &[&str] = &[
    "ArrayDeque",
    "ArrayList",
    "Arrays",
    "BitSet",
    "Calendar",
    "Collection",
    "Collections",
    "Comparator",
    "Date",
    "Deque",
    "HashMap",
    "HashSet",
    "Hashtable",
    "Iterator",
    "LinkedHashMap",
    "LinkedHashSet",
    "LinkedList",
    "List",
    "ListIterator",
    "Locale",
    "Map",
    "NavigableMap",
    "NavigableSet",
    "NoSuchElementException",
    "Objects",
    "Optional",
    "OptionalDouble",
    "OptionalInt",
    "OptionalLong",
    "PriorityQueue",
    "Queue",
    "Random",
    "Set",
    "SortedMap",
    "SortedSet",
    "Stack",
    "StringJoiner",
    "StringTokenizer",
    "TreeMap",
    "TreeSet",
    "UUID",
    "Vector",
];

const JAVA_UTIL_FUNCTION: &[&str] = &[
    "BiConsumer",
    "BiFunction",
    "BiPredicate",
    "BinaryOperator",
    "Consumer",
    "Function",
    "IntFunction",
    "Predicate",
    "Supplier",
    "UnaryOperator",
];

const JAVA_UTIL_STREAM: &[&str] = &[
    "Collectors",
    "DoubleStream",
    "IntStream",
    "LongStream",
    "Stream",
];

const JAVA_MATH: &[&str] = &["BigDecimal", "BigInteger", "MathContext", "RoundingMode"];

const JAVA_TIME: &[&str] = &[
    "DayOfWeek",
    "Duration",
    "Instant",
    "LocalDate",
    "LocalDateTime",
    "LocalTime",
    "Month",
    "MonthDay",
    "Period",
    "Year",
    "ZoneId",
    "ZonedDateTime",
];

/// Resolve a simple type name against the allowlist.
///
/// Returns `Some(None)` for `java.lang` types (no import needed),
/// `Some(Some(path))` for types that need an explicit import, and `None`
/// for names outside the allowlist.
pub fn resolve(simple: &str) -> Option<Option<String>> {
    if JAVA_LANG.contains(&simple) {
        return Some(None);
    }
    for (pkg, names) in [
        ("java.util", JAVA_UTIL),
        ("java.util.function", JAVA_UTIL_FUNCTION),
        ("java.util.stream", JAVA_UTIL_STREAM),
        ("java.math", JAVA_MATH),
        ("java.time", JAVA_TIME),
    ] {
        if names.contains(&simple) {
            return Some(Some(format!("{pkg}.{simple}")));
        }
    }
    None
}

/// True when `simple` names a core JDK type from the allowlist. Stubs and
/// template-declared names must never shadow these.
pub fn is_core_type(simple: &str) -> bool {
    resolve(simple).is_some()
}

/// True when a fully qualified path belongs to the allowlist packages.
pub fn known_import(path: &str) -> bool {
    let Some((pkg, simple)) = path.rsplit_once('.') else {
        return false;
    };
    matches!(
        pkg,
        "java.lang" | "java.util" | "java.util.function" | "java.util.stream" | "java.math" | "java.time"
    ) && resolve(simple).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolution() {
        assert_eq!(resolve("String"), Some(None));
        assert_eq!(resolve("List"), Some(Some("java.util.List".into())));
        assert_eq!(resolve("Stream"), Some(Some("java.util.stream.Stream".into())));
        assert_eq!(resolve("Widget"), None);
    }

    #[test]
    fn core_type_check() {
        assert!(is_core_type("Map"));
        assert!(is_core_type("Object"));
        assert!(!is_core_type("MyHelper"));
    }
}
