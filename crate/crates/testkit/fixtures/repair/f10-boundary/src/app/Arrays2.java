package app;

public class Arrays2 {
    public static int get(int[] xs, int i) {
        if (i >= 0 && i <= xs.length) {
            return xs[i];
        }
        return -1;
    }
}
