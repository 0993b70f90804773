package app;

public class Counter {
    public static int count(String s) {
        int n = 0;
        n = s.length();
        return n;
    }
}
