package corpus;

public class Recursion {
    public static long factorial(int n) {
        return n <= 1 ? 1L : n * factorial(n - 1);
    }

    public static int fib(int n) {
        if (n < 2) {
            return n;
        }
        return fib(n - 1) + fib(n - 2);
    }

    public static int gcd(int a, int b) {
        return b == 0 ? a : gcd(b, a % b);
    }

    public static int ackermann(int m, int n) {
        if (m == 0) return n + 1;
        if (n == 0) return ackermann(m - 1, 1);
        return ackermann(m - 1, ackermann(m, n - 1));
    }

    public static boolean subsetSum(int[] xs, int i, int target) {
        if (target == 0) return true;
        if (i >= xs.length || target < 0) return false;
        return subsetSum(xs, i + 1, target - xs[i]) || subsetSum(xs, i + 1, target);
    }

    static class Hanoi {
        int moves;

        void solve(int n, int from, int to, int via) {
            if (n == 0) {
                return;
            }
            solve(n - 1, from, via, to);
            moves++;
            solve(n - 1, via, to, from);
        }
    }
}
