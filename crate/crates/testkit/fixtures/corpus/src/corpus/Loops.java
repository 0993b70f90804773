package corpus;

public class Loops {
    public static int firstDuplicate(int[] xs) {
        outer:
        for (int i = 0; i < xs.length; i++) {
            for (int j = 0; j < i; j++) {
                if (xs[i] == xs[j]) {
                    break outer;
                }
                if (xs[j] < 0) {
                    continue outer;
                }
            }
            if (i == xs.length - 1) return -1;
        }
        return 0;
    }

    public static int digitsSum(int n) {
        int s = 0;
        do {
            s += n % 10;
            n /= 10;
        } while (n > 0);
        return s;
    }

    public static int countdown(int n) {
        int steps = 0;
        while (true) {
            if (n <= 0) break;
            n -= 3;
            steps++;
        }
        return steps;
    }

    public static long sumSquares(int n) {
        long s = 0;
        for (int i = 1; i <= n; i++) s += (long) i * i;
        return s;
    }

    public static int collatz(long n) {
        int steps = 0;
        while (n != 1) {
            n = (n % 2 == 0) ? n / 2 : 3 * n + 1;
            steps++;
        }
        return steps;
    }
}
