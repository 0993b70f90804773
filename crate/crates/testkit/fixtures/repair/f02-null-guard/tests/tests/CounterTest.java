package tests;

public class CounterTest {
    public static boolean countsChars() {
        return app.Counter.count("abc") == 3;
    }

    public static boolean nullIsZero() {
        return app.Counter.count(null) == 0;
    }
}
