package tests;

public class SizesTest {
    public static boolean stringSize() {
        return app.Sizes.size("abcd") == 4;
    }

    public static boolean otherTypes() {
        return app.Sizes.size(new Integer(3)) == -1;
    }
}
