package app;

public class Sizes {
    public static int size(Object o) {
        int n = -1;
        String s = (String) o;
        n = s.length();
        return n;
    }
}
