package tests;

public class Arrays2Test {
    static int[] data() {
        return new int[] { 1, 2, 3, 4, 5 };
    }

    public static boolean inside() {
        return app.Arrays2.get(data(), 2) == 3;
    }

    public static boolean farOutside() {
        return app.Arrays2.get(data(), 7) == -1;
    }

    public static boolean negative() {
        return app.Arrays2.get(data(), -1) == -1;
    }

    public static boolean atLength() {
        return app.Arrays2.get(data(), 5) == -1;
    }
}
