use crate::scalar::Scalar;

/// Gegenbauer polynomial `C_n^{(index)}(x)` by the three-term recurrence
/// `n·C_n = 2x(n+index−1)·C_{n−1} − (n+2·index−2)·C_{n−2}`.
pub fn gegenbauer<T: Scalar>(n: usize, index: T, x: T) -> T {
    let two = T::lit(2.0);
    let mut prev = T::one();
    if n == 0 {
        return prev;
    }
    let mut cur = two * index * x;
    for k in 2..=n {
        let kf = T::from_usize_lossy(k);
        let next = (two * x * (kf + index - T::one()) * cur - (kf + two * index - two) * prev) / kf;
        prev = cur;
        cur = next;
    }
    cur
}

/// `C_0 … C_n` at `x` in one pass.
pub fn gegenbauer_all<T: Scalar>(n: usize, index: T, x: T) -> Vec<T> {
    let two = T::lit(2.0);
    let mut out = Vec::with_capacity(n + 1);
    out.push(T::one());
    if n == 0 {
        return out;
    }
    out.push(two * index * x);
    for k in 2..=n {
        let kf = T::from_usize_lossy(k);
        let v = (two * x * (kf + index - T::one()) * out[k - 1]
            - (kf + two * index - two) * out[k - 2])
            / kf;
        out.push(v);
    }
    out
}
